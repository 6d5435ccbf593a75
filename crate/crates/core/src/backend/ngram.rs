//! Corpus-trained n-gram backend.
//!
//! An interpolated trigram/bigram/unigram model with additive smoothing,
//! mixed with a within-sentence co-occurrence ("topic") component so that
//! long-range context moves probabilities, not just the last two tokens.
//! The probability of `w` after context `ctx` is
//!
//! ```text
//! P(w | ctx) = (1 − topic_weight) · P_ngram(w | last two tokens)
//!            + topic_weight · P_topic(w | content words of ctx)
//! ```
//!
//! where `P_ngram = λ3·P3 + λ2·P2 + λ1·P1` (higher orders contribute zero on
//! unseen contexts) and `P_topic` is a softmax over the vocabulary of mean
//! log co-occurrence conditionals. Everything is a pure function of the
//! training counts, so two trainings on the same sentences are identical.
//!
//! Mask filling scores a candidate by `P(candidate | left context)` times
//! the n-gram probability of the token following the mask, normalized over
//! the vocabulary; out-of-vocabulary candidates get the smoothing floor
//! rather than an error.

use std::collections::HashMap;

use super::{BackendError, Candidate, LmBackend, MaskedQuery, EOS_TOKEN};
use crate::text;

const BOS: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct NgramConfig {
    /// Interpolation weights for trigram, bigram, unigram.
    pub lambda: [f64; 3],
    /// Additive smoothing mass for the unigram floor.
    pub alpha: f64,
    /// Additive smoothing for co-occurrence conditionals.
    pub beta: f64,
    /// Share of the topic component in the final mixture.
    pub topic_weight: f64,
    /// Most recent context content words fed to the topic component.
    pub topic_window: usize,
}

impl Default for NgramConfig {
    fn default() -> Self {
        Self {
            lambda: [0.5, 0.3, 0.2],
            alpha: 0.1,
            beta: 0.5,
            topic_weight: 0.35,
            topic_window: 12,
        }
    }
}

/// N-gram language model over lowercase word tokens plus `</s>`.
#[derive(Debug, Clone)]
pub struct NgramBackend {
    cfg: NgramConfig,
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    unigram: Vec<u64>,
    total_tokens: u64,
    bigram: HashMap<(u32, u32), u64>,
    bigram_ctx: HashMap<u32, u64>,
    trigram: HashMap<(u32, u32, u32), u64>,
    trigram_ctx: HashMap<(u32, u32), u64>,
    /// Unordered within-sentence co-occurrence counts, key (min, max).
    cooc: HashMap<(u32, u32), u64>,
    cooc_total: Vec<u64>,
}

impl NgramBackend {
    /// Train from tokenized sentences. An `</s>` transition is counted at
    /// the end of every sentence.
    pub fn train(sentences: &[Vec<String>], cfg: NgramConfig) -> Result<Self, BackendError> {
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(BackendError::Failure("no training sentences".into()));
        }
        let mut vocab: Vec<String> = sentences
            .iter()
            .flatten()
            .cloned()
            .chain(std::iter::once(EOS_TOKEN.to_string()))
            .collect();
        vocab.sort();
        vocab.dedup();
        let ids: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let mut model = Self {
            cfg,
            unigram: vec![0; vocab.len()],
            cooc_total: vec![0; vocab.len()],
            vocab,
            ids,
            total_tokens: 0,
            bigram: HashMap::new(),
            bigram_ctx: HashMap::new(),
            trigram: HashMap::new(),
            trigram_ctx: HashMap::new(),
            cooc: HashMap::new(),
        };
        model.absorb(sentences);
        Ok(model)
    }

    /// Add more sentences to the counts. Words unseen at `train` time are
    /// folded into the unigram floor rather than new vocabulary entries, so
    /// vocabulary identity is stable across tuning rounds.
    pub fn fine_tune(&mut self, sentences: &[Vec<String>]) {
        self.absorb(sentences);
    }

    fn absorb(&mut self, sentences: &[Vec<String>]) {
        for sent in sentences {
            if sent.is_empty() {
                continue;
            }
            let ids: Vec<u32> = sent
                .iter()
                .map(|t| self.ids.get(t).copied().unwrap_or(BOS))
                .chain(std::iter::once(self.ids[EOS_TOKEN]))
                .collect();
            let mut h2 = BOS;
            let mut h1 = BOS;
            for &w in &ids {
                if w != BOS {
                    self.unigram[w as usize] += 1;
                    self.total_tokens += 1;
                    *self.bigram.entry((h1, w)).or_insert(0) += 1;
                    *self.trigram.entry((h2, h1, w)).or_insert(0) += 1;
                }
                *self.bigram_ctx.entry(h1).or_insert(0) += 1;
                *self.trigram_ctx.entry((h2, h1)).or_insert(0) += 1;
                h2 = h1;
                h1 = w;
            }
            // Co-occurrence over distinct content-word pairs in the sentence.
            let mut content: Vec<u32> = sent
                .iter()
                .filter(|t| text::is_word(t) && !crate::stopwords::is_stopword(t))
                .filter_map(|t| self.ids.get(t).copied())
                .collect();
            content.sort_unstable();
            content.dedup();
            for (i, &a) in content.iter().enumerate() {
                for &b in &content[i + 1..] {
                    *self.cooc.entry((a, b)).or_insert(0) += 1;
                    self.cooc_total[a as usize] += 1;
                    self.cooc_total[b as usize] += 1;
                }
            }
        }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    fn unigram_prob(&self, word_id: Option<u32>) -> f64 {
        let c = word_id.map_or(0, |w| self.unigram[w as usize]) as f64;
        let v = self.vocab.len() as f64 + 1.0;
        (c + self.cfg.alpha) / (self.total_tokens as f64 + self.cfg.alpha * v)
    }

    fn ngram_prob(&self, h2: u32, h1: u32, word_id: Option<u32>) -> f64 {
        let [l3, l2, l1] = self.cfg.lambda;
        let p1 = self.unigram_prob(word_id);
        let Some(w) = word_id else {
            return l1 * p1;
        };
        let p2 = match self.bigram_ctx.get(&h1) {
            Some(&ctx) if ctx > 0 => {
                self.bigram.get(&(h1, w)).copied().unwrap_or(0) as f64 / ctx as f64
            }
            _ => 0.0,
        };
        let p3 = match self.trigram_ctx.get(&(h2, h1)) {
            Some(&ctx) if ctx > 0 => {
                self.trigram.get(&(h2, h1, w)).copied().unwrap_or(0) as f64 / ctx as f64
            }
            _ => 0.0,
        };
        l3 * p3 + l2 * p2 + l1 * p1
    }

    fn history(&self, context: &[String]) -> (u32, u32) {
        let mut it = context.iter().rev();
        let h1 = it.next().and_then(|t| self.id(t)).unwrap_or(BOS);
        let h2 = it.next().and_then(|t| self.id(t)).unwrap_or(BOS);
        (h2, h1)
    }

    fn topic_context(&self, context: &[String]) -> Vec<u32> {
        context
            .iter()
            .filter(|t| text::is_word(t) && !crate::stopwords::is_stopword(t))
            .filter_map(|t| self.id(t))
            .rev()
            .take(self.cfg.topic_window)
            .collect()
    }

    /// Mean log conditional co-occurrence score; higher means `w` keeps the
    /// company of the context words.
    fn topic_score(&self, w: u32, topic: &[u32]) -> f64 {
        let v = self.vocab.len() as f64;
        let mut sum = 0.0;
        for &c in topic {
            let key = if w < c { (w, c) } else { (c, w) };
            let joint = if w == c {
                0
            } else {
                self.cooc.get(&key).copied().unwrap_or(0)
            };
            let denom = self.cooc_total[c as usize] as f64 + self.cfg.beta * v;
            sum += ((joint as f64 + self.cfg.beta) / denom).ln();
        }
        sum / topic.len() as f64
    }

    /// Topic distribution over the full vocabulary; None when the context
    /// carries no usable content words.
    fn topic_distribution(&self, context: &[String]) -> Option<Vec<f64>> {
        let topic = self.topic_context(context);
        if topic.is_empty() {
            return None;
        }
        let scores: Vec<f64> = (0..self.vocab.len() as u32)
            .map(|w| self.topic_score(w, &topic))
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Some(exps.into_iter().map(|e| e / total).collect())
    }

    /// Full-mixture probability of one word. `topic` is the cached topic
    /// distribution for the context, if any.
    fn mix_prob(&self, h2: u32, h1: u32, topic: Option<&[f64]>, word_id: Option<u32>) -> f64 {
        let pn = self.ngram_prob(h2, h1, word_id);
        match (topic, word_id) {
            (Some(dist), Some(w)) => {
                (1.0 - self.cfg.topic_weight) * pn + self.cfg.topic_weight * dist[w as usize]
            }
            (Some(_), None) => (1.0 - self.cfg.topic_weight) * pn,
            (None, _) => pn,
        }
    }

    /// P(word | context) under the full mixture; public so tests and the
    /// surprisal oracle can read probabilities directly.
    pub fn probability(&self, context: &[String], word: &str) -> f64 {
        let (h2, h1) = self.history(context);
        let topic = self.topic_distribution(context);
        self.mix_prob(h2, h1, topic.as_deref(), self.id(word))
    }

    fn mask_fill_raw(&self, template: &[String], mask_pos: usize, candidate: &str) -> f64 {
        let left = &template[..mask_pos];
        let mut score = self.probability(left, candidate);
        if mask_pos + 1 < template.len() {
            let h2 = if mask_pos >= 1 {
                left.last().and_then(|t| self.id(t)).unwrap_or(BOS)
            } else {
                BOS
            };
            let h1 = self.id(candidate).unwrap_or(BOS);
            score *= self.ngram_prob(h2, h1, self.id(&template[mask_pos + 1]));
        }
        score
    }
}

impl LmBackend for NgramBackend {
    fn name(&self) -> &str {
        "ngram"
    }

    fn mask_fill_probability(&self, query: &MaskedQuery) -> Result<f64, BackendError> {
        let pos = query.mask_position();
        let raw = self.mask_fill_raw(query.template(), pos, query.candidate());
        let mut total = 0.0;
        for word in &self.vocab {
            total += self.mask_fill_raw(query.template(), pos, word);
        }
        if self.id(query.candidate()).is_none() {
            total += raw;
        }
        Ok(raw / total)
    }

    fn mask_fill_batch(
        &self,
        template: &[String],
        candidates: &[&str],
    ) -> Result<Vec<f64>, BackendError> {
        let pos = template
            .iter()
            .position(|t| t == super::MASK_TOKEN)
            .ok_or_else(|| BackendError::MalformedQuery("no mask in template".into()))?;
        let raws: Vec<f64> = candidates
            .iter()
            .map(|c| self.mask_fill_raw(template, pos, c))
            .collect();
        let total: f64 = raws.iter().sum();
        if total == 0.0 {
            return Ok(vec![0.0; candidates.len()]);
        }
        Ok(raws.into_iter().map(|r| r / total).collect())
    }

    fn next_word_candidates(
        &self,
        prefix: &[String],
        n: usize,
    ) -> Result<Vec<Candidate>, BackendError> {
        if n == 0 {
            return Err(BackendError::InvalidArgument("n must be >= 1".into()));
        }
        let (h2, h1) = self.history(prefix);
        let topic = self.topic_distribution(prefix);
        let mut scored: Vec<(usize, f64)> = (0..self.vocab.len())
            .map(|i| {
                (
                    i,
                    self.mix_prob(h2, h1, topic.as_deref(), Some(i as u32)),
                )
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(n)
            .map(|(i, p)| Candidate {
                word: self.vocab[i].clone(),
                logprob: p.ln(),
            })
            .collect())
    }

    fn word_surprisal(&self, context: &[String], word: &str) -> Result<f64, BackendError> {
        if word.is_empty() {
            return Err(BackendError::InvalidArgument("empty word".into()));
        }
        Ok(-self.probability(context, word).ln())
    }
}

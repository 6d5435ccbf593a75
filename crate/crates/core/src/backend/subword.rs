//! Complete-word rollout over piece-level models.
//!
//! Generation backends that emit subword pieces cannot answer "what whole
//! word comes next" directly. [`rollout_complete_words`] runs a small beam
//! over pieces until each hypothesis closes a word boundary, capped at
//! [`MAX_CONTINUATIONS`] extensions per word; hypotheses still open at the
//! cap are dropped. A piece whose text starts with a space opens a new word,
//! following the usual BPE convention.

use super::{BackendError, Candidate};
use crate::hash::{fnv1a_parts, to_unit};

/// Hard cap on piece continuations per word; avoids livelock on models that
/// never close a boundary.
pub const MAX_CONTINUATIONS: usize = 4;

/// A model that scores subword pieces given a piece prefix.
pub trait SubwordLm {
    /// Top `n` next pieces with natural-log probabilities. A returned piece
    /// beginning with `' '` starts a new word.
    fn next_pieces(&self, prefix: &[String], n: usize) -> Result<Vec<(String, f64)>, BackendError>;
}

#[derive(Debug, Clone)]
struct Hypothesis {
    pieces: Vec<String>,
    word: String,
    logprob: f64,
    extensions: usize,
}

/// Roll piece beams forward until `beam` hypotheses each hold one complete
/// word; returns them sorted by non-increasing log-probability.
pub fn rollout_complete_words(
    lm: &dyn SubwordLm,
    prefix: &[String],
    beam: usize,
    n: usize,
) -> Result<Vec<Candidate>, BackendError> {
    if n == 0 || beam == 0 {
        return Err(BackendError::InvalidArgument(
            "beam and n must be >= 1".into(),
        ));
    }
    // Seed: only pieces that open a new word are valid word starts.
    let mut live: Vec<Hypothesis> = lm
        .next_pieces(prefix, beam)?
        .into_iter()
        .filter(|(p, _)| p.starts_with(' '))
        .map(|(p, lp)| Hypothesis {
            word: p.trim_start().to_string(),
            pieces: vec![p],
            logprob: lp,
            extensions: 0,
        })
        .collect();
    let mut complete: Vec<Candidate> = Vec::new();

    while !live.is_empty() {
        let mut next_live: Vec<Hypothesis> = Vec::new();
        for hyp in live {
            let mut ctx: Vec<String> = prefix.to_vec();
            ctx.extend(hyp.pieces.iter().cloned());
            let continuations = lm.next_pieces(&ctx, beam)?;
            if continuations.is_empty() {
                continue;
            }
            // The word is complete when the model's best continuation
            // opens a new word.
            if continuations[0].0.starts_with(' ') {
                complete.push(Candidate {
                    word: hyp.word.clone(),
                    logprob: hyp.logprob,
                });
                continue;
            }
            if hyp.extensions + 1 > MAX_CONTINUATIONS {
                continue; // dropped: never closed a boundary
            }
            for (piece, lp) in continuations {
                if piece.starts_with(' ') {
                    continue;
                }
                let mut pieces = hyp.pieces.clone();
                pieces.push(piece.clone());
                next_live.push(Hypothesis {
                    word: format!("{}{}", hyp.word, piece),
                    pieces,
                    logprob: hyp.logprob + lp,
                    extensions: hyp.extensions + 1,
                });
            }
        }
        next_live.sort_by(|a, b| b.logprob.partial_cmp(&a.logprob).unwrap());
        next_live.truncate(beam);
        live = next_live;
    }

    if complete.is_empty() {
        return Err(BackendError::EmptyVocabulary);
    }
    complete.sort_by(|a, b| b.logprob.partial_cmp(&a.logprob).unwrap());
    complete.truncate(n);
    Ok(complete)
}

/// Piece-level mock over a fixed word list, chunked 3 characters at a time.
/// Piece scores hash the piece prefix, so outputs are recomputable.
#[derive(Debug, Clone)]
pub struct MockSubwordLm {
    words: Vec<String>,
}

impl MockSubwordLm {
    pub fn new(words: &[&str]) -> Self {
        Self {
            words: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    /// Current partial word: concatenation of pieces after the last
    /// word-opening piece.
    fn partial(prefix: &[String]) -> String {
        let mut partial = String::new();
        for piece in prefix.iter().rev() {
            if let Some(stripped) = piece.strip_prefix(' ') {
                partial.insert_str(0, stripped);
                return partial;
            }
            partial.insert_str(0, piece);
        }
        partial
    }
}

impl SubwordLm for MockSubwordLm {
    fn next_pieces(&self, prefix: &[String], n: usize) -> Result<Vec<(String, f64)>, BackendError> {
        let partial = Self::partial(prefix);
        let mut offers: Vec<String> = Vec::new();
        for word in &self.words {
            if partial.is_empty() || partial == *word {
                // At a boundary (or on a finished word): offer new-word starts.
                let chunk: String = word.chars().take(3).collect();
                offers.push(format!(" {chunk}"));
            } else if let Some(rest) = word.strip_prefix(partial.as_str()) {
                if !rest.is_empty() {
                    let chunk: String = rest.chars().take(3).collect();
                    offers.push(chunk);
                }
            }
        }
        offers.sort();
        offers.dedup();
        if offers.is_empty() {
            return Ok(Vec::new());
        }
        let joined = prefix.join("");
        let raws: Vec<f64> = offers
            .iter()
            .map(|p| to_unit(fnv1a_parts(&[&joined, p])))
            .collect();
        let total: f64 = raws.iter().sum();
        let mut scored: Vec<(String, f64)> = offers
            .into_iter()
            .zip(raws)
            .map(|(p, r)| (p, (r / total).ln()))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        scored.truncate(n);
        Ok(scored)
    }
}

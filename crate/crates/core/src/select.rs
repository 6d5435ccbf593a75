//! Context word and phrase selection.
//!
//! Given a pun pair, two things come out of the non-pun corpus: a phrase
//! that is characteristic of the alternative word yet compatible with the
//! pun word, and a context word that supports the pun word. The phrase goes
//! through two mask-infill rankings: keep the half most probable for the
//! alternative word, then take the median-ranked survivor under the pun
//! word, avoiding both the too-general top and the incompatible bottom.

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, LmBackend, PunPair};
use crate::corpus::{extract_phrase, Corpus, CorpusError, Phrase};
use crate::hash::SplitMix64;
use crate::rake;
use crate::stopwords::is_stopword;

#[derive(Debug, thiserror::Error)]
pub enum SelectError {
    #[error("word {0:?} does not occur in the corpus")]
    RetrievalFailure(String),
    #[error("only {0} phrase(s) survive stage-1 ranking; need at least 2")]
    InsufficientCandidates(usize),
    #[error("no context-word candidates for {0:?}")]
    NoContextCandidates(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// One phrase with its two-stage scores. `p_stage2`/`rank_stage2` stay empty
/// for phrases eliminated by the first ranking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredPhrase {
    pub phrase: Phrase,
    pub p_stage1: f64,
    /// 1-based rank in the full stage-1 candidate set.
    pub rank_stage1: usize,
    pub p_stage2: Option<f64>,
    /// 1-based rank within the survivors.
    pub rank_stage2: Option<usize>,
}

/// Full two-stage ranking output, kept for provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhraseRanking {
    /// All candidates sorted by stage-1 probability, descending.
    pub stage1: Vec<ScoredPhrase>,
    /// Indices (into `stage1`) of survivors sorted by stage-2 probability,
    /// descending.
    pub survivor_order: Vec<usize>,
    /// Index into `survivor_order` of the median pick.
    pub selected: usize,
}

/// The chosen phrase plus the numbers that justify it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhraseSelection {
    /// Phrase tokens with the pun word substituted at the anchor.
    pub phrase: Phrase,
    pub p_aw: f64,
    pub p_pw: f64,
    pub rank_aw: usize,
    pub rank_pw: usize,
    pub candidate_count: usize,
    pub survivor_count: usize,
}

/// The sampled context word with its pool and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextSelection {
    pub word: String,
    pub tfidf: f64,
    pub pool: Vec<String>,
    pub seed: u64,
    /// True when the uniqueness filter had to be dropped to get a pool.
    pub degraded: bool,
}

/// Up to `n1` phrases containing `word`, one per sentence (first occurrence
/// anchors), in ascending sentence order.
pub fn retrieve_phrases(
    corpus: &Corpus,
    word: &str,
    n1: usize,
    window: usize,
) -> Result<Vec<Phrase>, SelectError> {
    let ids = corpus.sentences_containing(word);
    if ids.is_empty() {
        return Err(SelectError::RetrievalFailure(word.to_string()));
    }
    let mut phrases = Vec::new();
    for &id in ids.iter().take(n1) {
        phrases.push(extract_phrase(&corpus.sentence(id).tokens, word, window, id)?);
    }
    Ok(phrases)
}

/// Two-stage mask-infill ranking.
///
/// Stage 1 scores `P(stage1_word | masked)` for every phrase and discards
/// the less probable half (of `k` candidates, `ceil(k/2)` survive). Stage 2
/// re-scores survivors with `stage2_word` and picks the median, lower on
/// even counts. Ties in either stage keep ascending sentence order.
pub fn rank_phrases(
    phrases: Vec<Phrase>,
    stage1_word: &str,
    stage2_word: &str,
    backend: &dyn LmBackend,
) -> Result<PhraseRanking, SelectError> {
    let mut stage1: Vec<ScoredPhrase> = Vec::with_capacity(phrases.len());
    for phrase in phrases {
        let query = crate::backend::MaskedQuery::new(phrase.masked(), stage1_word)?;
        let p = backend.mask_fill_probability(&query)?;
        stage1.push(ScoredPhrase {
            phrase,
            p_stage1: p,
            rank_stage1: 0,
            p_stage2: None,
            rank_stage2: None,
        });
    }
    stage1.sort_by(|a, b| {
        b.p_stage1
            .partial_cmp(&a.p_stage1)
            .unwrap()
            .then(a.phrase.source_sentence_id.cmp(&b.phrase.source_sentence_id))
    });
    for (i, sp) in stage1.iter_mut().enumerate() {
        sp.rank_stage1 = i + 1;
    }

    let keep = stage1.len().div_ceil(2);
    if keep < 2 {
        return Err(SelectError::InsufficientCandidates(keep));
    }
    for sp in stage1.iter_mut().take(keep) {
        let query = crate::backend::MaskedQuery::new(sp.phrase.masked(), stage2_word)?;
        sp.p_stage2 = Some(backend.mask_fill_probability(&query)?);
    }

    let mut survivor_order: Vec<usize> = (0..keep).collect();
    survivor_order.sort_by(|&a, &b| {
        stage1[b]
            .p_stage2
            .unwrap()
            .partial_cmp(&stage1[a].p_stage2.unwrap())
            .unwrap()
            .then(
                stage1[a]
                    .phrase
                    .source_sentence_id
                    .cmp(&stage1[b].phrase.source_sentence_id),
            )
    });
    for (rank0, &idx) in survivor_order.iter().enumerate() {
        stage1[idx].rank_stage2 = Some(rank0 + 1);
    }

    // Lower median: for m survivors pick 0-based index (m − 1) / 2.
    let selected = (survivor_order.len() - 1) / 2;
    Ok(PhraseRanking {
        stage1,
        survivor_order,
        selected,
    })
}

/// Retrieve phrases containing the alternative word, rank them, and return
/// the median survivor with the pun word substituted at the anchor.
pub fn select_phrase(
    corpus: &Corpus,
    pair: &PunPair,
    backend: &dyn LmBackend,
    n1: usize,
    window: usize,
) -> Result<PhraseSelection, SelectError> {
    let phrases = retrieve_phrases(corpus, &pair.aw, n1, window)?;
    let ranking = rank_phrases(phrases, &pair.aw, &pair.pw, backend)?;
    Ok(selection_from_ranking(&ranking, &pair.pw))
}

/// Turn a ranking into a [`PhraseSelection`], substituting `output_word`
/// at the anchor of the chosen phrase.
pub fn selection_from_ranking(ranking: &PhraseRanking, output_word: &str) -> PhraseSelection {
    let chosen = &ranking.stage1[ranking.survivor_order[ranking.selected]];
    let mut phrase = chosen.phrase.clone();
    phrase.tokens = chosen.phrase.with_anchor(output_word);
    PhraseSelection {
        phrase,
        p_aw: chosen.p_stage1,
        p_pw: chosen.p_stage2.unwrap(),
        rank_aw: chosen.rank_stage1,
        rank_pw: chosen.rank_stage2.unwrap(),
        candidate_count: ranking.stage1.len(),
        survivor_count: ranking.survivor_order.len(),
    }
}

/// Context word for the pun word: RAKE keywords from pw-sentences, scored
/// by TF-IDF, filtered to words absent from aw-sentences, top-`n2` pool,
/// one sampled by `seed`.
pub fn select_context_word(
    corpus: &Corpus,
    pair: &PunPair,
    n2: usize,
    seed: u64,
) -> Result<ContextSelection, SelectError> {
    let support = corpus.sentences_containing(&pair.pw);
    if support.is_empty() {
        return Err(SelectError::RetrievalFailure(pair.pw.clone()));
    }
    let avoid = corpus.sentences_containing(&pair.aw).to_vec();
    select_context_word_from(
        corpus,
        support,
        &avoid,
        &[pair.pw.as_str(), pair.aw.as_str()],
        n2,
        seed,
        0,
    )
}

/// Generalized context-word selection over explicit sentence-id sets.
/// `max_shared` is the number of `avoid_ids` sentences a keyword may appear
/// in before the uniqueness filter rejects it (0 = strict disjointness).
#[allow(clippy::too_many_arguments)]
pub fn select_context_word_from(
    corpus: &Corpus,
    support_ids: &[usize],
    avoid_ids: &[usize],
    exclude_words: &[&str],
    n2: usize,
    seed: u64,
    max_shared: usize,
) -> Result<ContextSelection, SelectError> {
    if support_ids.is_empty() {
        return Err(SelectError::NoContextCandidates(
            "empty support sentence set".into(),
        ));
    }
    let mut keywords: Vec<String> = Vec::new();
    for &id in support_ids {
        for (word, _) in rake::rake_keywords(&corpus.sentence(id).tokens) {
            keywords.push(word);
        }
    }
    keywords.sort();
    keywords.dedup();
    keywords.retain(|w| !exclude_words.iter().any(|e| e.eq_ignore_ascii_case(w)));
    keywords.retain(|w| !is_stopword(w));
    if keywords.is_empty() {
        return Err(SelectError::NoContextCandidates(
            "no RAKE keywords in support sentences".into(),
        ));
    }

    let scores = rake::tfidf_scores_over(corpus, &keywords, support_ids);
    let shared_count = |word: &str| -> usize {
        let postings = corpus.sentences_containing(word);
        intersection_size(postings, avoid_ids)
    };

    let build_pool = |apply_uniqueness: bool| -> Vec<(String, f64)> {
        let mut ranked: Vec<(String, f64)> = keywords
            .iter()
            .filter(|w| !apply_uniqueness || shared_count(w) <= max_shared)
            .map(|w| (w.clone(), scores[w.as_str()]))
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(n2);
        ranked
    };

    let mut degraded = false;
    let mut pool = build_pool(true);
    if pool.is_empty() {
        degraded = true;
        pool = build_pool(false);
    }
    if pool.is_empty() {
        return Err(SelectError::NoContextCandidates(
            "pool empty even without uniqueness filter".into(),
        ));
    }

    let pick = SplitMix64::new(seed).next_index(pool.len());
    let (word, tfidf) = pool[pick].clone();
    Ok(ContextSelection {
        word,
        tfidf,
        pool: pool.into_iter().map(|(w, _)| w).collect(),
        seed,
        degraded,
    })
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

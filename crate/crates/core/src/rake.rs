//! RAKE keyword scoring and TF-IDF over the corpus.
//!
//! Candidate chunks are maximal runs of content words between stopwords or
//! punctuation. Per occurrence, a word's frequency grows by one and its
//! degree by the chunk length (co-occurrence count including itself); the
//! score is degree/frequency. Multiword chunks are split into single words
//! that inherit their component scores.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::stopwords::is_stopword;
use crate::text;

/// Ranked single-word keywords, score-descending, ties alphabetical.
pub fn rake_keywords(tokens: &[String]) -> Vec<(String, f64)> {
    let mut chunks: Vec<Vec<&String>> = Vec::new();
    let mut current: Vec<&String> = Vec::new();
    for tok in tokens {
        if text::is_word(tok) && !is_stopword(tok) {
            current.push(tok);
        } else if !current.is_empty() {
            chunks.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        chunks.push(current);
    }

    let mut freq: BTreeMap<&String, f64> = BTreeMap::new();
    let mut degree: BTreeMap<&String, f64> = BTreeMap::new();
    for chunk in &chunks {
        let len = chunk.len() as f64;
        for word in chunk {
            *freq.entry(word).or_insert(0.0) += 1.0;
            *degree.entry(word).or_insert(0.0) += len;
        }
    }

    let mut scored: Vec<(String, f64)> = freq
        .iter()
        .map(|(word, f)| ((*word).clone(), degree[word] / f))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored
}

/// TF-IDF of `words`: term frequency counted inside the sentences containing
/// `cooccurring_with`, IDF from document frequency over the whole corpus.
pub fn tfidf_scores(
    corpus: &Corpus,
    words: &[String],
    cooccurring_with: &str,
) -> BTreeMap<String, f64> {
    tfidf_scores_over(corpus, words, corpus.sentences_containing(cooccurring_with))
}

/// Same scoring with an explicit co-occurrence sentence set.
pub fn tfidf_scores_over(
    corpus: &Corpus,
    words: &[String],
    subset: &[usize],
) -> BTreeMap<String, f64> {
    let n = corpus.len() as f64;
    let mut tf: BTreeMap<String, f64> = BTreeMap::new();
    for &id in subset {
        for tok in &corpus.sentence(id).tokens {
            *tf.entry(tok.clone()).or_insert(0.0) += 1.0;
        }
    }
    let mut scores = BTreeMap::new();
    for word in words {
        let word_lc = word.to_lowercase();
        let df = corpus.doc_freq(&word_lc) as f64;
        let idf = if df > 0.0 { (n / df).ln() } else { 0.0 };
        let term_freq = tf.get(&word_lc).copied().unwrap_or(0.0);
        scores.insert(word_lc, term_freq * idf);
    }
    scores
}

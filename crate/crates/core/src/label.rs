//! Token-type labels: unsupervised curation, threshold search, dataset
//! bootstrapping, and the confidence-gated next-type predictor.
//!
//! The unsupervised labeler compares embedding similarity toward each side
//! of the pun pair: a word is distinct when the signed cosine gap clears a
//! threshold, ambiguous otherwise. Classifier training data keeps only the
//! confident ends of that rule: gaps above 1.5·T become D1/D2, gaps below
//! T become A, and the noisy band in between is discarded.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{
    BackendError, ClassifierInput, Label, PunPair, TokenClassifier, TrainingExample,
};
use crate::embedding::EmbeddingTable;
use crate::stopwords::is_stopword;
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("word {0:?} is out of the embedding vocabulary")]
    OutOfVocabulary(String),
    #[error("grid search needs a non-empty threshold grid")]
    EmptyGrid,
    #[error("annotated set covers fewer than 2 classes")]
    SingleClass,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset line {0}: {1}")]
    BadRecord(usize, String),
}

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Unsupervised,
    Classifier,
    Human,
}

/// One labeled token position: the sentence before the word, the word, the
/// pair, and the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub prefix: Vec<String>,
    pub tw: String,
    pub pw: String,
    pub aw: String,
    pub label: Label,
    pub source: LabelSource,
}

impl LabeledExample {
    pub fn pair(&self) -> PunPair {
        PunPair::new(&self.pw, &self.aw)
    }

    /// Shape used by classifier training (current word known).
    pub fn to_training(&self) -> TrainingExample {
        TrainingExample {
            prefix: self.prefix.clone(),
            current: Some(self.tw.clone()),
            pw: self.pw.clone(),
            aw: self.aw.clone(),
            label: self.label,
        }
    }

    /// Shape used by next-type predictor training (current word hidden).
    pub fn to_predictor_training(&self) -> TrainingExample {
        TrainingExample {
            prefix: self.prefix.clone(),
            current: None,
            pw: self.pw.clone(),
            aw: self.aw.clone(),
            label: self.label,
        }
    }

    fn classifier_input(&self) -> ClassifierInput<'_> {
        ClassifierInput {
            prefix: &self.prefix,
            current: Some(&self.tw),
            pw: &self.pw,
            aw: &self.aw,
        }
    }
}

/// Signed similarity gap cos(tw, pw) − cos(tw, aw). Callers threshold the
/// absolute value; the sign picks D1 (positive) or D2 (negative).
pub fn similarity_gap(
    tw: &str,
    pair: &PunPair,
    emb: &EmbeddingTable,
) -> Result<f64, LabelError> {
    for w in [tw, &pair.pw, &pair.aw] {
        if !emb.contains(w) {
            return Err(LabelError::OutOfVocabulary(w.to_string()));
        }
    }
    let toward_pw = emb.cosine(tw, &pair.pw).unwrap_or(0.0);
    let toward_aw = emb.cosine(tw, &pair.aw).unwrap_or(0.0);
    Ok(toward_pw - toward_aw)
}

/// Threshold rule over the gap. Stopwords, punctuation, and OOV words fall
/// back to A: they carry no meaning-side evidence.
pub fn unsupervised_label(tw: &str, pair: &PunPair, emb: &EmbeddingTable, t: f64) -> Label {
    if !text::is_word(tw) || is_stopword(tw) {
        return Label::A;
    }
    match similarity_gap(tw, pair, emb) {
        Ok(gap) if gap.abs() > t => {
            if gap > 0.0 {
                Label::D1
            } else {
                Label::D2
            }
        }
        _ => Label::A,
    }
}

/// Grid search for the threshold maximizing token-level micro accuracy of
/// the unsupervised labeler against annotated examples. Ties take the
/// smaller threshold.
pub fn grid_search_threshold(
    annotated: &[LabeledExample],
    emb: &EmbeddingTable,
    grid: &[f64],
) -> Result<(f64, f64), LabelError> {
    if grid.is_empty() {
        return Err(LabelError::EmptyGrid);
    }
    let classes: std::collections::HashSet<Label> =
        annotated.iter().map(|ex| ex.label).collect();
    if classes.len() < 2 {
        return Err(LabelError::SingleClass);
    }
    let mut best = (f64::NAN, -1.0f64);
    let mut sorted_grid: Vec<f64> = grid.to_vec();
    sorted_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &t in &sorted_grid {
        let hits = annotated
            .iter()
            .filter(|ex| unsupervised_label(&ex.tw, &ex.pair(), emb, t) == ex.label)
            .count();
        let acc = hits as f64 / annotated.len() as f64;
        if acc > best.1 {
            best = (t, acc);
        }
    }
    Ok(best)
}

/// Build classifier training data from a pun corpus.
///
/// Per non-stopword in-vocabulary word token: |gap| > 1.5·T gives a distinct
/// label, |gap| < T gives A, and the `[T, 1.5T]` band is excluded. Stopword,
/// punctuation, and OOV positions are not emitted at all, so every curated
/// example carries a computable out-of-band gap.
pub fn curate_classifier_dataset(
    pun_corpus: &[(Vec<String>, PunPair)],
    emb: &EmbeddingTable,
    t: f64,
) -> Vec<LabeledExample> {
    let mut out = Vec::new();
    for (tokens, pair) in pun_corpus {
        for (i, tw) in tokens.iter().enumerate() {
            if !text::is_word(tw) || is_stopword(tw) {
                continue;
            }
            let Ok(gap) = similarity_gap(tw, pair, emb) else {
                continue;
            };
            let label = if gap.abs() > 1.5 * t {
                if gap > 0.0 {
                    Label::D1
                } else {
                    Label::D2
                }
            } else if gap.abs() < t {
                Label::A
            } else {
                continue; // noisy band
            };
            out.push(LabeledExample {
                prefix: tokens[..i].to_vec(),
                tw: tw.clone(),
                pw: pair.pw.clone(),
                aw: pair.aw.clone(),
                label,
                source: LabelSource::Unsupervised,
            });
        }
    }
    out
}

/// Compose the predictor's training set: automatic examples the classifier
/// agrees with (re-sourced as classifier-vetted), plus all human examples.
/// Disagreements without a human label are dropped.
pub fn build_predictor_dataset(
    classifier: &dyn TokenClassifier,
    auto: &[LabeledExample],
    human: &[LabeledExample],
) -> Result<Vec<LabeledExample>, LabelError> {
    let mut out = Vec::new();
    for ex in auto {
        let (label, _) = classifier.classify(&ex.classifier_input())?;
        if label == ex.label {
            let mut kept = ex.clone();
            kept.source = LabelSource::Classifier;
            out.push(kept);
        }
    }
    for ex in human {
        let mut kept = ex.clone();
        kept.source = LabelSource::Human;
        out.push(kept);
    }
    Ok(out)
}

/// Next-type prediction with the confidence gate applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NextTypePrediction {
    pub label: Label,
    pub confidence: f64,
    /// True only when confidence strictly exceeds the threshold; the
    /// decoder must leave candidate order alone otherwise.
    pub steer: bool,
}

/// A trained next-type model plus its confidence threshold.
pub struct PredictorHandle {
    pub classifier: Box<dyn TokenClassifier>,
    pub confidence_threshold: f64,
}

impl PredictorHandle {
    pub fn new(classifier: Box<dyn TokenClassifier>, confidence_threshold: f64) -> Self {
        assert!((0.0..=1.0).contains(&confidence_threshold));
        Self {
            classifier,
            confidence_threshold,
        }
    }

    /// Predict the type of the not-yet-generated next word.
    pub fn predict_next_type(
        &self,
        prefix: &[String],
        pair: &PunPair,
    ) -> Result<NextTypePrediction, LabelError> {
        let input = ClassifierInput {
            prefix,
            current: None,
            pw: &pair.pw,
            aw: &pair.aw,
        };
        let (label, confidence) = self.classifier.classify(&input)?;
        Ok(NextTypePrediction {
            label,
            confidence,
            steer: confidence > self.confidence_threshold,
        })
    }
}

/// Write examples as JSONL, one record per line.
pub fn write_examples(path: &Path, examples: &[LabeledExample]) -> Result<(), LabelError> {
    let mut file = std::fs::File::create(path)?;
    for ex in examples {
        writeln!(file, "{}", serde_json::to_string(ex).unwrap())?;
    }
    Ok(())
}

/// Read a JSONL dataset written by [`write_examples`] (or hand-authored
/// human annotations in the same shape).
pub fn read_examples(path: &Path) -> Result<Vec<LabeledExample>, LabelError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: LabeledExample = serde_json::from_str(&line)
            .map_err(|e| LabelError::BadRecord(lineno + 1, e.to_string()))?;
        out.push(ex);
    }
    Ok(out)
}

/// Counts of predicted labels over every word token of a pun corpus, using
/// the classifier as the labeler. Used for structure statistics such as the
/// D1/D2 imbalance of human puns.
pub fn label_distribution(
    classifier: &dyn TokenClassifier,
    pun_corpus: &[(Vec<String>, PunPair)],
) -> Result<[usize; 3], LabelError> {
    let mut counts = [0usize; 3];
    for (tokens, pair) in pun_corpus {
        for (i, tw) in tokens.iter().enumerate() {
            if !text::is_word(tw) {
                continue;
            }
            let input = ClassifierInput {
                prefix: &tokens[..i],
                current: Some(tw),
                pw: &pair.pw,
                aw: &pair.aw,
            };
            let (label, _) = classifier.classify(&input)?;
            counts[Label::ORDER.iter().position(|l| *l == label).unwrap()] += 1;
        }
    }
    Ok(counts)
}

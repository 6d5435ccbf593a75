//! Trainable three-way token-type classifier.
//!
//! Multinomial logistic regression over embedding-similarity features of
//! (prefix, optional current word, pun pair). Full-batch gradient descent in
//! a fixed example order keeps training deterministic. Trained models
//! persist as a directory holding `manifest.json` (label order, feature
//! count) and `weights.json`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BackendError, ClassifierInput, Label, TokenClassifier, TrainingExample};
use crate::embedding::EmbeddingTable;
use crate::text;

/// Number of features; see [`features`] for the layout.
pub const FEATURE_COUNT: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.5,
            l2: 1e-4,
        }
    }
}

/// Feature vector layout:
/// 0 bias, 1 cos(x,pw), 2 cos(x,aw), 3 their difference, 4 |difference|,
/// 5 prefix mean cos to pw, 6 prefix mean cos to aw, 7 their difference,
/// 8 last-prefix-word gap, 9 clipped prefix length.
/// `x` is the current word when present, else the last prefix content word.
pub fn features(input: &ClassifierInput, emb: &EmbeddingTable) -> [f64; FEATURE_COUNT] {
    let cos = |a: &str, b: &str| emb.cosine(a, b).unwrap_or(0.0);
    let prefix_content: Vec<&str> = input
        .prefix
        .iter()
        .filter(|t| text::is_word(t) && !crate::stopwords::is_stopword(t))
        .map(|s| s.as_str())
        .collect();
    let focus: Option<&str> = input.current.or_else(|| prefix_content.last().copied());

    let (c_pw, c_aw) = match focus {
        Some(x) => (cos(x, input.pw), cos(x, input.aw)),
        None => (0.0, 0.0),
    };
    let (mean_pw, mean_aw) = if prefix_content.is_empty() {
        (0.0, 0.0)
    } else {
        let n = prefix_content.len() as f64;
        (
            prefix_content.iter().map(|w| cos(w, input.pw)).sum::<f64>() / n,
            prefix_content.iter().map(|w| cos(w, input.aw)).sum::<f64>() / n,
        )
    };
    let last_gap = prefix_content
        .last()
        .map(|w| cos(w, input.pw) - cos(w, input.aw))
        .unwrap_or(0.0);

    [
        1.0,
        c_pw,
        c_aw,
        c_pw - c_aw,
        (c_pw - c_aw).abs(),
        mean_pw,
        mean_aw,
        mean_pw - mean_aw,
        last_gap,
        (input.prefix.len() as f64).min(20.0) / 20.0,
    ]
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    labels: Vec<String>,
    feature_count: usize,
    config: ClassifierConfig,
}

/// Linear softmax classifier bound to an embedding table.
#[derive(Debug, Clone)]
pub struct EmbeddingClassifier {
    weights: [[f64; FEATURE_COUNT]; 3],
    emb: Arc<EmbeddingTable>,
    config: ClassifierConfig,
}

fn softmax3(scores: [f64; 3]) -> [f64; 3] {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps = [
        (scores[0] - max).exp(),
        (scores[1] - max).exp(),
        (scores[2] - max).exp(),
    ];
    let total = exps[0] + exps[1] + exps[2];
    [exps[0] / total, exps[1] / total, exps[2] / total]
}

impl EmbeddingClassifier {
    /// Train on labeled examples. Refuses empty datasets and datasets with a
    /// single represented class, which would fit a degenerate constant
    /// predictor.
    pub fn train(
        dataset: &[TrainingExample],
        emb: Arc<EmbeddingTable>,
        config: ClassifierConfig,
    ) -> Result<Self, BackendError> {
        if dataset.is_empty() {
            return Err(BackendError::RefuseToTrain("empty dataset".into()));
        }
        let mut present = [false; 3];
        for ex in dataset {
            present[Label::ORDER.iter().position(|l| *l == ex.label).unwrap()] = true;
        }
        if present.iter().filter(|p| **p).count() < 2 {
            return Err(BackendError::RefuseToTrain(
                "dataset covers a single class".into(),
            ));
        }

        let feats: Vec<[f64; FEATURE_COUNT]> =
            dataset.iter().map(|ex| features(&ex.input(), &emb)).collect();
        let targets: Vec<usize> = dataset
            .iter()
            .map(|ex| Label::ORDER.iter().position(|l| *l == ex.label).unwrap())
            .collect();

        let mut weights = [[0f64; FEATURE_COUNT]; 3];
        let n = dataset.len() as f64;
        for _ in 0..config.epochs {
            let mut grad = [[0f64; FEATURE_COUNT]; 3];
            for (f, &t) in feats.iter().zip(&targets) {
                let scores = [
                    dot(&weights[0], f),
                    dot(&weights[1], f),
                    dot(&weights[2], f),
                ];
                let probs = softmax3(scores);
                for c in 0..3 {
                    let err = probs[c] - if c == t { 1.0 } else { 0.0 };
                    for (g, x) in grad[c].iter_mut().zip(f) {
                        *g += err * x;
                    }
                }
            }
            for c in 0..3 {
                for k in 0..FEATURE_COUNT {
                    weights[c][k] -=
                        config.learning_rate * (grad[c][k] / n + config.l2 * weights[c][k]);
                }
            }
        }
        Ok(Self {
            weights,
            emb,
            config,
        })
    }

    /// Fraction of examples the trained model labels correctly.
    pub fn accuracy(&self, dataset: &[TrainingExample]) -> f64 {
        if dataset.is_empty() {
            return 0.0;
        }
        let hits = dataset
            .iter()
            .filter(|ex| {
                self.classify(&ex.input())
                    .map(|(l, _)| l == ex.label)
                    .unwrap_or(false)
            })
            .count();
        hits as f64 / dataset.len() as f64
    }

    /// Per-category F1 in [`Label::ORDER`] order, plus the macro average.
    pub fn f1_scores(&self, dataset: &[TrainingExample]) -> ([f64; 3], f64) {
        let pairs: Vec<(Label, Label)> = dataset
            .iter()
            .filter_map(|ex| {
                self.classify(&ex.input())
                    .ok()
                    .map(|(pred, _)| (ex.label, pred))
            })
            .collect();
        let mut scores = [0f64; 3];
        for (i, class) in Label::ORDER.iter().enumerate() {
            let tp = pairs.iter().filter(|(g, p)| g == class && p == class).count() as f64;
            let fp = pairs.iter().filter(|(g, p)| g != class && p == class).count() as f64;
            let missed = pairs.iter().filter(|(g, p)| g == class && p != class).count() as f64;
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + missed > 0.0 { tp / (tp + missed) } else { 0.0 };
            scores[i] = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
        }
        (scores, scores.iter().sum::<f64>() / 3.0)
    }

    /// Persist to `dir` as an opaque handle directory.
    pub fn save(&self, dir: &Path) -> Result<(), BackendError> {
        std::fs::create_dir_all(dir).map_err(|e| BackendError::Failure(e.to_string()))?;
        let manifest = Manifest {
            labels: Label::ORDER.iter().map(|l| l.as_str().to_string()).collect(),
            feature_count: FEATURE_COUNT,
            config: self.config.clone(),
        };
        let manifest_json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| BackendError::Failure(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), manifest_json)
            .map_err(|e| BackendError::Failure(e.to_string()))?;
        let weights: Vec<Vec<f64>> = self.weights.iter().map(|r| r.to_vec()).collect();
        let weights_json = serde_json::to_string(&weights)
            .map_err(|e| BackendError::Failure(e.to_string()))?;
        std::fs::write(dir.join("weights.json"), weights_json)
            .map_err(|e| BackendError::Failure(e.to_string()))?;
        Ok(())
    }

    /// Load a handle directory saved by [`save`]. Unknown or corrupt
    /// directories produce a `BadHandle` error.
    pub fn load(dir: &Path, emb: Arc<EmbeddingTable>) -> Result<Self, BackendError> {
        let manifest_raw = std::fs::read_to_string(dir.join("manifest.json"))
            .map_err(|e| BackendError::BadHandle(format!("{}: {e}", dir.display())))?;
        let manifest: Manifest = serde_json::from_str(&manifest_raw)
            .map_err(|e| BackendError::BadHandle(e.to_string()))?;
        let expected: Vec<String> = Label::ORDER.iter().map(|l| l.as_str().to_string()).collect();
        if manifest.labels != expected || manifest.feature_count != FEATURE_COUNT {
            return Err(BackendError::BadHandle(
                "manifest does not match this model family".into(),
            ));
        }
        let weights_raw = std::fs::read_to_string(dir.join("weights.json"))
            .map_err(|e| BackendError::BadHandle(e.to_string()))?;
        let rows: Vec<Vec<f64>> = serde_json::from_str(&weights_raw)
            .map_err(|e| BackendError::BadHandle(e.to_string()))?;
        if rows.len() != 3 || rows.iter().any(|r| r.len() != FEATURE_COUNT) {
            return Err(BackendError::BadHandle("weight shape mismatch".into()));
        }
        let mut weights = [[0f64; FEATURE_COUNT]; 3];
        for (c, row) in rows.iter().enumerate() {
            weights[c].copy_from_slice(row);
        }
        Ok(Self {
            weights,
            emb,
            config: manifest.config,
        })
    }
}

fn dot(w: &[f64; FEATURE_COUNT], f: &[f64; FEATURE_COUNT]) -> f64 {
    w.iter().zip(f).map(|(a, b)| a * b).sum()
}

impl TokenClassifier for EmbeddingClassifier {
    fn distribution(&self, input: &ClassifierInput) -> Result<[f64; 3], BackendError> {
        let f = features(input, &self.emb);
        Ok(softmax3([
            dot(&self.weights[0], &f),
            dot(&self.weights[1], &f),
            dot(&self.weights[2], &f),
        ]))
    }
}

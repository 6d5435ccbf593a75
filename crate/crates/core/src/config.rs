//! Pipeline configuration: one TOML file, CLI flags mirroring its fields.
//!
//! Every output file embeds `config_hash()` so a run can be traced back to
//! the exact parameters and seed that produced it.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::hash::fnv1a;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// All pipeline parameters. Defaults follow the reference regime:
/// N1 = N2 = 20 retrieval candidates, labeling threshold T = 0.15,
/// confidence gate 0.9, 20 decode candidates, phrase window 3, local
/// surprisal window 2, max length 50.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Plain-text corpus files (sentence-per-line or running text).
    pub corpus_paths: Vec<PathBuf>,
    /// Corpus snapshot directory; produced by `ingest`, consumed elsewhere.
    pub snapshot_dir: Option<PathBuf>,
    /// Language-model backend: "mock" or "ngram".
    pub backend: String,
    /// Embedding table file (GloVe-style text). Absent: train from corpus.
    pub embedding_file: Option<PathBuf>,
    /// Trained predictor handle directory. Absent: hash-seeded mock
    /// predictor (reproducible, useful with the mock backend).
    pub predictor_dir: Option<PathBuf>,
    /// Reverse-dictionary lexicon (JSONL word/definition records), needed
    /// for homographic tasks.
    pub lexicon_file: Option<PathBuf>,
    pub n1: usize,
    pub n2: usize,
    /// Unsupervised labeling threshold T.
    pub threshold: f64,
    /// Predictor confidence gate T_c.
    pub confidence_threshold: f64,
    /// Candidates fetched per decode step.
    pub candidate_count: usize,
    pub phrase_window: usize,
    pub local_window: usize,
    pub max_len: usize,
    /// Minimum generated tokens before end-of-sentence is eligible.
    pub min_len: usize,
    pub seed: u64,
    /// Worker threads for embarrassingly parallel stages.
    pub workers: usize,
    /// Metric scale multiplier.
    pub metric_scale: f64,
    /// Metric epsilon for the penalized surprisal branch.
    pub metric_epsilon: f64,
    /// WSD margin below which a phrase's sense is unknown.
    pub wsd_epsilon: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus_paths: Vec::new(),
            snapshot_dir: None,
            backend: "ngram".to_string(),
            embedding_file: None,
            predictor_dir: None,
            lexicon_file: None,
            n1: 20,
            n2: 20,
            threshold: 0.15,
            confidence_threshold: 0.9,
            candidate_count: 20,
            phrase_window: 3,
            local_window: 2,
            max_len: 50,
            min_len: 8,
            seed: 0,
            workers: 1,
            metric_scale: 100.0,
            metric_epsilon: 1e-6,
            wsd_epsilon: 0.05,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path)?;
        let cfg: PipelineConfig =
            toml::from_str(&raw).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check every invariant and report all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.backend != "mock" && self.backend != "ngram" {
            problems.push(format!("backend: {:?} is not \"mock\" or \"ngram\"", self.backend));
        }
        for (name, value) in [
            ("threshold", self.threshold),
            ("confidence_threshold", self.confidence_threshold),
            ("wsd_epsilon", self.wsd_epsilon),
        ] {
            if !(0.0..=1.0).contains(&value) {
                problems.push(format!("{name}: {value} outside [0, 1]"));
            }
        }
        for (name, value) in [
            ("n1", self.n1),
            ("n2", self.n2),
            ("candidate_count", self.candidate_count),
            ("max_len", self.max_len),
            ("workers", self.workers),
        ] {
            if value < 1 {
                problems.push(format!("{name}: must be >= 1"));
            }
        }
        if self.local_window < 1 {
            problems.push("local_window: must be >= 1".to_string());
        }
        if self.min_len > self.max_len {
            problems.push(format!(
                "min_len: {} exceeds max_len {}",
                self.min_len, self.max_len
            ));
        }
        if self.metric_scale <= 0.0 {
            problems.push(format!("metric_scale: {} must be positive", self.metric_scale));
        }
        if self.metric_epsilon <= 0.0 {
            problems.push(format!(
                "metric_epsilon: {} must be positive",
                self.metric_epsilon
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    /// FNV-1a fingerprint of the canonical JSON serialization, as hex.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a(json.as_bytes()))
    }

    pub fn metric_params(&self) -> crate::metrics::MetricParams {
        crate::metrics::MetricParams {
            scale: self.metric_scale,
            epsilon: self.metric_epsilon,
            local_window: self.local_window,
        }
    }

    pub fn decode_config(&self) -> crate::generate::DecodeConfig {
        crate::generate::DecodeConfig {
            max_len: self.max_len,
            min_len: self.min_len,
            candidate_count: self.candidate_count,
            block_immediate_repeat: true,
            seed: self.seed,
            force_phrase_start: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_regime() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.n1, 20);
        assert_eq!(cfg.n2, 20);
        assert_eq!(cfg.threshold, 0.15);
        assert_eq!(cfg.confidence_threshold, 0.9);
        assert_eq!(cfg.candidate_count, 20);
        assert_eq!(cfg.phrase_window, 3);
        assert_eq!(cfg.local_window, 2);
        assert_eq!(cfg.max_len, 50);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validation_lists_every_violation() {
        let cfg = PipelineConfig {
            backend: "gpt5".into(),
            threshold: 2.0,
            n1: 0,
            ..PipelineConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        let ConfigError::Invalid(problems) = err else {
            panic!("expected Invalid");
        };
        assert_eq!(problems.len(), 3);
        assert!(problems.iter().any(|p| p.starts_with("backend")));
        assert!(problems.iter().any(|p| p.starts_with("threshold")));
        assert!(problems.iter().any(|p| p.starts_with("n1")));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = PipelineConfig::default();
        let b = PipelineConfig::default();
        assert_eq!(a.config_hash(), b.config_hash());
        let c = PipelineConfig {
            seed: 1,
            ..PipelineConfig::default()
        };
        assert_ne!(a.config_hash(), c.config_hash());
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = PipelineConfig {
            corpus_paths: vec!["fixtures/corpus/nonpun.txt".into()],
            backend: "mock".into(),
            seed: 42,
            ..PipelineConfig::default()
        };
        let toml_text = toml::to_string(&cfg).unwrap();
        let back: PipelineConfig = toml::from_str(&toml_text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let result: Result<PipelineConfig, _> = toml::from_str("n1 = 20\nmystery = 5\n");
        assert!(result.is_err());
    }
}

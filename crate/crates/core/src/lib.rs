//! punkit: pun generation from a pun-word/alternative-word pair.
//!
//! The pipeline retrieves a supporting context word and a surprise-arousing
//! phrase from a non-pun corpus, steers a generation backend step by step
//! with a next-token-type predictor (ambiguous / distinct-to-pun /
//! distinct-to-alternative), and scores outputs with ambiguity,
//! distinctiveness, and surprisal metrics. Homographic tasks (one spelling,
//! two senses) are converted to the homophonic form via word-sense tagging
//! and a reverse dictionary.
//!
//! Model capabilities sit behind the [`backend`] traits; the shipped
//! implementations are a deterministic hash-specified mock and an n-gram
//! model trained from the corpus, so the whole pipeline runs and tests
//! offline.

pub mod backend;
pub mod config;
pub mod corpus;
pub mod embedding;
pub mod generate;
pub mod hash;
pub mod homograph;
pub mod label;
pub mod metrics;
pub mod pipeline;
pub mod rake;
pub mod select;
pub mod stopwords;
pub mod text;

pub use backend::{Candidate, Label, LmBackend, MaskedQuery, PunPair, TokenClassifier};
pub use config::PipelineConfig;
pub use corpus::{Corpus, Phrase};
pub use embedding::EmbeddingTable;

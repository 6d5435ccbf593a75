//! Language-model capabilities behind one trait, plus token-type
//! classification.
//!
//! The pipeline never talks to a concrete model: phrase selection, decoding,
//! and the surprisal metric all go through [`LmBackend`], and the label
//! predictor goes through [`TokenClassifier`]. Shipped implementations are a
//! hash-specified mock (tests, reproducibility) and an n-gram model trained
//! from a corpus. Probabilities travel as natural logs internally and turn
//! into [0, 1] values only at the interface edge.

use serde::{Deserialize, Serialize};

pub mod classifier;
pub mod mock;
pub mod ngram;
pub mod subword;

pub use classifier::EmbeddingClassifier;
pub use mock::{MockClassifier, MockLmBackend};
pub use ngram::NgramBackend;

/// Placeholder token marking the masked position in a template.
pub const MASK_TOKEN: &str = "<mask>";

/// End-of-sentence sentinel produced by generation backends.
pub const EOS_TOKEN: &str = "</s>";

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("malformed masked query: {0}")]
    MalformedQuery(String),
    #[error("empty vocabulary after subword continuation")]
    EmptyVocabulary,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("refusing to train: {0}")]
    RefuseToTrain(String),
    #[error("classifier handle unusable: {0}")]
    BadHandle(String),
    #[error("backend failure: {0}")]
    Failure(String),
}

/// A template with exactly one `<mask>` slot and the word to score there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedQuery {
    template: Vec<String>,
    candidate: String,
}

impl MaskedQuery {
    /// Validates the two invariants: exactly one mask position, and a
    /// non-empty whitespace-free candidate.
    pub fn new(template: Vec<String>, candidate: &str) -> Result<Self, BackendError> {
        let masks = template.iter().filter(|t| *t == MASK_TOKEN).count();
        if masks != 1 {
            return Err(BackendError::MalformedQuery(format!(
                "expected exactly one {MASK_TOKEN}, found {masks}"
            )));
        }
        if candidate.is_empty() || candidate.chars().any(char::is_whitespace) {
            return Err(BackendError::MalformedQuery(
                "candidate must be a single non-empty word".into(),
            ));
        }
        Ok(Self {
            template,
            candidate: candidate.to_string(),
        })
    }

    pub fn template(&self) -> &[String] {
        &self.template
    }

    pub fn candidate(&self) -> &str {
        &self.candidate
    }

    /// Index of the mask within the template.
    pub fn mask_position(&self) -> usize {
        self.template
            .iter()
            .position(|t| t == MASK_TOKEN)
            .expect("validated at construction")
    }
}

/// A complete-word continuation with its log-probability (natural log).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub word: String,
    pub logprob: f64,
}

/// The three token types a word in a pun can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Ambiguous between the two readings.
    A,
    /// Distinct to the pun word.
    D1,
    /// Distinct to the alternative word.
    D2,
}

impl Label {
    /// Canonical label order used by every classifier distribution.
    pub const ORDER: [Label; 3] = [Label::A, Label::D1, Label::D2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::A => "A",
            Label::D1 => "D1",
            Label::D2 => "D2",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "A" => Some(Label::A),
            "D1" => Some(Label::D1),
            "D2" => Some(Label::D2),
            _ => None,
        }
    }

    /// D1 and D2 trade places when the pun pair is swapped; A is fixed.
    pub fn swapped(&self) -> Label {
        match self {
            Label::A => Label::A,
            Label::D1 => Label::D2,
            Label::D2 => Label::D1,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pun word / alternative word pair driving a generation task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunPair {
    /// The word that appears in the final sentence.
    pub pw: String,
    /// The similar word the reader is primed to expect.
    pub aw: String,
}

impl PunPair {
    pub fn new(pw: &str, aw: &str) -> Self {
        Self {
            pw: pw.to_lowercase(),
            aw: aw.to_lowercase(),
        }
    }

    pub fn swapped(&self) -> PunPair {
        PunPair {
            pw: self.aw.clone(),
            aw: self.pw.clone(),
        }
    }
}

/// Everything the pipeline needs from a language model.
pub trait LmBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Whether calls may be issued from multiple workers at once. Backends
    /// answering `false` are wrapped in a queue by the pipeline.
    fn supports_concurrent_use(&self) -> bool {
        true
    }

    /// P(candidate | template) in [0, 1].
    fn mask_fill_probability(&self, query: &MaskedQuery) -> Result<f64, BackendError>;

    /// Scores several candidates against one template in a single call.
    /// Values are normalized over the supplied candidate set.
    fn mask_fill_batch(
        &self,
        template: &[String],
        candidates: &[&str],
    ) -> Result<Vec<f64>, BackendError>;

    /// Up to `n` complete-word continuations, log-probs non-increasing.
    fn next_word_candidates(
        &self,
        prefix: &[String],
        n: usize,
    ) -> Result<Vec<Candidate>, BackendError>;

    /// −ln P(word | context), in nats. Never negative.
    fn word_surprisal(&self, context: &[String], word: &str) -> Result<f64, BackendError>;
}

/// Serializes calls to a backend that declared itself unsafe for concurrent
/// use; the wrapper itself is then safe to share across workers.
pub struct QueuedBackend {
    inner: Box<dyn LmBackend>,
    gate: std::sync::Mutex<()>,
}

impl QueuedBackend {
    /// Wrap only when needed; concurrent-safe backends pass through.
    pub fn wrap_if_serial(backend: Box<dyn LmBackend>) -> Box<dyn LmBackend> {
        if backend.supports_concurrent_use() {
            backend
        } else {
            Box::new(QueuedBackend {
                inner: backend,
                gate: std::sync::Mutex::new(()),
            })
        }
    }
}

impl LmBackend for QueuedBackend {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn supports_concurrent_use(&self) -> bool {
        true
    }

    fn mask_fill_probability(&self, query: &MaskedQuery) -> Result<f64, BackendError> {
        let _held = self.gate.lock().unwrap();
        self.inner.mask_fill_probability(query)
    }

    fn mask_fill_batch(
        &self,
        template: &[String],
        candidates: &[&str],
    ) -> Result<Vec<f64>, BackendError> {
        let _held = self.gate.lock().unwrap();
        self.inner.mask_fill_batch(template, candidates)
    }

    fn next_word_candidates(
        &self,
        prefix: &[String],
        n: usize,
    ) -> Result<Vec<Candidate>, BackendError> {
        let _held = self.gate.lock().unwrap();
        self.inner.next_word_candidates(prefix, n)
    }

    fn word_surprisal(&self, context: &[String], word: &str) -> Result<f64, BackendError> {
        let _held = self.gate.lock().unwrap();
        self.inner.word_surprisal(context, word)
    }
}

/// Input to the token-type models: the sentence so far, optionally the word
/// under judgement (absent for next-type prediction), and the pun pair.
#[derive(Debug, Clone)]
pub struct ClassifierInput<'a> {
    pub prefix: &'a [String],
    pub current: Option<&'a str>,
    pub pw: &'a str,
    pub aw: &'a str,
}

/// A labeled training example in the shape the classifier consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub prefix: Vec<String>,
    pub current: Option<String>,
    pub pw: String,
    pub aw: String,
    pub label: Label,
}

impl TrainingExample {
    pub fn input(&self) -> ClassifierInput<'_> {
        ClassifierInput {
            prefix: &self.prefix,
            current: self.current.as_deref(),
            pw: &self.pw,
            aw: &self.aw,
        }
    }
}

/// Three-way token-type model. The distribution is always over
/// [`Label::ORDER`] and sums to one.
pub trait TokenClassifier: Send + Sync {
    fn distribution(&self, input: &ClassifierInput) -> Result<[f64; 3], BackendError>;

    /// Argmax label plus its probability. Ties resolve to the earlier
    /// label in canonical order.
    fn classify(&self, input: &ClassifierInput) -> Result<(Label, f64), BackendError> {
        let dist = self.distribution(input)?;
        let mut best = 0;
        for i in 1..3 {
            if dist[i] > dist[best] {
                best = i;
            }
        }
        Ok((Label::ORDER[best], dist[best]))
    }
}

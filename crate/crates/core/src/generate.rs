//! Task-format tuning data and label-steered discriminative decoding.
//!
//! Each step fetches N candidate next words from the backend and asks the
//! next-type predictor for a label. When the predictor is confident (strict
//! `c > T`), candidates are stable-sorted by semantic relevance toward the
//! pun word (D1), the alternative word (D2), or both (A, relevance summed);
//! otherwise the backend's own ranking stands. Once the first two phrase
//! words have been generated, the rest of the phrase is emitted verbatim
//! with the predictor bypassed.
//!
//! The generation prefix is seeded with the context word, so every output
//! opens with it; the phrase (and with it the pun word) is guaranteed by a
//! forced start near the length budget unless `force_phrase_start` is
//! turned off, in which case an output that never reached the phrase is
//! flagged incomplete instead.

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, Candidate, LmBackend, PunPair, EOS_TOKEN};
use crate::corpus::Corpus;
use crate::embedding::EmbeddingTable;
use crate::label::{LabelError, NextTypePrediction, PredictorHandle};
use crate::rake;
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid generation input: {0}")]
    InvalidInput(String),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Decoding knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    /// Maximum generated tokens, including the seeded context word.
    pub max_len: usize,
    /// End-of-sentence is not a legal candidate before this many tokens.
    pub min_len: usize,
    /// Candidates fetched from the backend per step.
    pub candidate_count: usize,
    pub seed: u64,
    /// Force the phrase to start when the remaining budget just fits it.
    pub force_phrase_start: bool,
    /// Drop candidates equal to the last emitted token; word-level backends
    /// loop without this.
    pub block_immediate_repeat: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            max_len: 50,
            min_len: 8,
            candidate_count: 20,
            seed: 0,
            force_phrase_start: true,
            block_immediate_repeat: true,
        }
    }
}

/// A ready-to-decode task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenInput {
    /// Pair driving steering and labeling (substitute pair for homographic
    /// tasks).
    pub pair: PunPair,
    pub context_word: String,
    /// Phrase word tokens; contains `phrase_word` exactly once.
    pub phrase: Vec<String>,
    /// The word of the pair present in the phrase: the pun word for
    /// homophonic tasks, the surface word for homographic ones.
    pub phrase_word: String,
    /// Words that must never be emitted (homographic substitutes).
    pub banned_words: Vec<String>,
    pub config: DecodeConfig,
}

impl GenInput {
    /// Homophonic task: the phrase already carries the pun word.
    pub fn homophonic(
        pair: PunPair,
        context_word: &str,
        phrase: &[String],
        config: DecodeConfig,
    ) -> Result<Self, GenerateError> {
        Self::build(pair.clone(), context_word, phrase, &pair.pw, Vec::new(), config)
    }

    /// Homographic task: the phrase carries the surface word while steering
    /// uses the substitute pair, which is banned from the output.
    pub fn homographic(
        substitute_pair: PunPair,
        surface: &str,
        context_word: &str,
        phrase: &[String],
        config: DecodeConfig,
    ) -> Result<Self, GenerateError> {
        let banned = vec![substitute_pair.pw.clone(), substitute_pair.aw.clone()];
        Self::build(substitute_pair, context_word, phrase, surface, banned, config)
    }

    fn build(
        pair: PunPair,
        context_word: &str,
        phrase: &[String],
        phrase_word: &str,
        banned_words: Vec<String>,
        config: DecodeConfig,
    ) -> Result<Self, GenerateError> {
        let phrase_word = phrase_word.to_lowercase();
        let context_word = context_word.to_lowercase();
        // Punctuation is dropped up front; matching and enforcement then
        // work on plain word tokens.
        let phrase: Vec<String> = phrase
            .iter()
            .filter(|t| text::is_word(t))
            .map(|t| t.to_lowercase())
            .collect();
        let occurrences = phrase.iter().filter(|t| **t == phrase_word).count();
        if occurrences != 1 {
            return Err(GenerateError::InvalidInput(format!(
                "phrase must contain {phrase_word:?} exactly once, found {occurrences}"
            )));
        }
        if phrase.len() < 2 {
            return Err(GenerateError::InvalidInput(
                "phrase must have at least 2 word tokens".into(),
            ));
        }
        if context_word == pair.pw || context_word == pair.aw {
            return Err(GenerateError::InvalidInput(
                "context word must differ from both pair words".into(),
            ));
        }
        if config.max_len < phrase.len() + 2 {
            return Err(GenerateError::InvalidInput(
                "max_len leaves no room for the phrase".into(),
            ));
        }
        Ok(Self {
            pair,
            context_word,
            phrase,
            phrase_word,
            banned_words,
            config,
        })
    }
}

/// One decode step in the log. Predicted steps carry the full candidate
/// list after ban filtering; enforced steps are verbatim phrase emissions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StepRecord {
    Predicted {
        label: crate::backend::Label,
        confidence: f64,
        steered: bool,
        chosen: String,
        topk: Vec<Candidate>,
    },
    Enforced {
        chosen: String,
    },
}

/// Mutable decoding state.
#[derive(Debug, Clone)]
pub struct DecodeState {
    pub prefix: Vec<String>,
    /// Leading phrase tokens already emitted (contiguous match).
    pub phrase_cursor: usize,
    pub enforcing: bool,
    pub steps: Vec<StepRecord>,
}

impl DecodeState {
    fn new(context_word: &str) -> Self {
        Self {
            prefix: vec![context_word.to_string()],
            phrase_cursor: 0,
            enforcing: false,
            steps: Vec::new(),
        }
    }

    fn emitted(&self) -> usize {
        self.prefix.len()
    }
}

/// Completed generation with its full replay log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generation {
    pub input: GenInput,
    pub sentence: String,
    pub tokens: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub phrase_completed: bool,
    /// True when the phrase start had to be forced rather than generated.
    pub phrase_forced: bool,
    /// True when decoding ended without completing the phrase.
    pub incomplete_phrase: bool,
}

/// Semantic relevance: cosine toward one target, sum of cosines toward two.
/// Out-of-vocabulary words score zero.
pub fn relevance_score(word: &str, targets: &[&str], emb: &EmbeddingTable) -> f64 {
    targets
        .iter()
        .map(|t| emb.cosine(word, t).unwrap_or(0.0))
        .sum()
}

fn steering_targets(label: crate::backend::Label, pair: &PunPair) -> Vec<&str> {
    match label {
        crate::backend::Label::D1 => vec![pair.pw.as_str()],
        crate::backend::Label::D2 => vec![pair.aw.as_str()],
        crate::backend::Label::A => vec![pair.pw.as_str(), pair.aw.as_str()],
    }
}

/// One discriminative step: fetch candidates, consult the predictor, pick.
/// Returns the chosen word, the prediction, and the filtered candidate list
/// in final order.
pub fn discriminative_step(
    state: &DecodeState,
    input: &GenInput,
    predictor: &PredictorHandle,
    backend: &dyn LmBackend,
    emb: &EmbeddingTable,
) -> Result<(String, NextTypePrediction, Vec<Candidate>), GenerateError> {
    let fetched = backend.next_word_candidates(&state.prefix, input.config.candidate_count)?;
    let too_short = state.prefix.len() < input.config.min_len;
    let last = state.prefix.last().cloned();
    let mut candidates: Vec<Candidate> = fetched
        .into_iter()
        .filter(|c| !input.banned_words.iter().any(|b| b == &c.word))
        .filter(|c| !(too_short && c.word == EOS_TOKEN))
        .filter(|c| {
            !(input.config.block_immediate_repeat && Some(&c.word) == last.as_ref())
        })
        .collect();
    if candidates.is_empty() {
        return Err(GenerateError::DecodeFailure(
            "no candidates left after filtering".into(),
        ));
    }
    let prediction = predictor.predict_next_type(&state.prefix, &input.pair)?;
    if prediction.steer {
        let targets = steering_targets(prediction.label, &input.pair);
        // Stable sort: ties keep the backend's ranking.
        candidates.sort_by(|a, b| {
            relevance_score(&b.word, &targets, emb)
                .partial_cmp(&relevance_score(&a.word, &targets, emb))
                .unwrap()
        });
    }
    Ok((candidates[0].word.clone(), prediction, candidates))
}

/// Run the full decoding loop.
pub fn generate(
    input: &GenInput,
    predictor: &PredictorHandle,
    backend: &dyn LmBackend,
    emb: &EmbeddingTable,
) -> Result<Generation, GenerateError> {
    let mut state = DecodeState::new(&input.context_word);
    let mut phrase_completed = false;
    let mut phrase_forced = false;
    let phrase = &input.phrase;

    while state.emitted() < input.config.max_len {
        if state.enforcing {
            let word = phrase[state.phrase_cursor].clone();
            state.steps.push(StepRecord::Enforced {
                chosen: word.clone(),
            });
            state.prefix.push(word);
            state.phrase_cursor += 1;
            if state.phrase_cursor == phrase.len() {
                state.enforcing = false;
                phrase_completed = true;
            }
            continue;
        }

        let budget_left = input.config.max_len - state.emitted();
        let phrase_left = phrase.len() - state.phrase_cursor;
        if !phrase_completed && input.config.force_phrase_start && budget_left <= phrase_left {
            // Out of room for a natural start: emit the rest verbatim.
            phrase_forced = true;
            force_remaining_phrase(&mut state, phrase, input.config.max_len);
            phrase_completed = state.phrase_cursor == phrase.len();
            break;
        }

        let (word, prediction, candidates) =
            discriminative_step(&state, input, predictor, backend, emb)?;

        if word == EOS_TOKEN {
            if !phrase_completed && input.config.force_phrase_start {
                // A sentence without the phrase is useless; start it now.
                phrase_forced = true;
                force_remaining_phrase(&mut state, phrase, input.config.max_len);
                phrase_completed = state.phrase_cursor == phrase.len();
            }
            break;
        }

        state.steps.push(StepRecord::Predicted {
            label: prediction.label,
            confidence: prediction.confidence,
            steered: prediction.steer,
            chosen: word.clone(),
            topk: candidates,
        });
        state.prefix.push(word.clone());

        if !phrase_completed {
            state.phrase_cursor = advance_cursor(state.phrase_cursor, phrase, &word);
            if state.phrase_cursor >= 2 {
                if state.phrase_cursor == phrase.len() {
                    phrase_completed = true;
                } else {
                    state.enforcing = true;
                }
            }
        }
    }

    let incomplete_phrase = !phrase_completed;
    Ok(Generation {
        input: input.clone(),
        sentence: text::render_sentence(&state.prefix),
        tokens: state.prefix,
        steps: state.steps,
        phrase_completed,
        phrase_forced,
        incomplete_phrase,
    })
}

/// Emit remaining phrase tokens from the cursor position, within budget.
fn force_remaining_phrase(state: &mut DecodeState, phrase: &[String], max_len: usize) {
    while state.phrase_cursor < phrase.len() && state.prefix.len() < max_len {
        let word = phrase[state.phrase_cursor].clone();
        state.steps.push(StepRecord::Enforced {
            chosen: word.clone(),
        });
        state.prefix.push(word);
        state.phrase_cursor += 1;
    }
}

/// Contiguous prefix matching against the phrase, case-insensitive (tokens
/// are already lowercase). A mismatch restarts at the phrase head.
fn advance_cursor(cursor: usize, phrase: &[String], word: &str) -> usize {
    if cursor < phrase.len() && phrase[cursor] == word {
        cursor + 1
    } else if phrase[0] == word {
        1
    } else {
        0
    }
}

/// Task-format tuning record: a standalone keyword, a phrase, and the
/// sentence containing both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub keyword: String,
    pub phrase: Vec<String>,
    pub sentence: Vec<String>,
}

/// Outcome counters for tuning-data preparation.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrepareStats {
    pub emitted: usize,
    pub skipped: usize,
}

/// Build tuning records from a corpus: per sentence, the two top RAKE words
/// become a standalone keyword (higher-ranked) and a phrase anchor
/// (lower-ranked, ±`window` tokens). Sentences where the keyword falls
/// inside the phrase window, or with fewer than two keywords, are skipped.
pub fn prepare_finetune_data(
    corpus: &Corpus,
    window: usize,
) -> (Vec<FinetuneRecord>, PrepareStats) {
    let mut records = Vec::new();
    let mut stats = PrepareStats::default();
    for sentence in corpus.sentences() {
        let ranked = rake::rake_keywords(&sentence.tokens);
        if ranked.len() < 2 {
            stats.skipped += 1;
            continue;
        }
        let keyword = ranked[0].0.clone();
        let anchor = ranked[1].0.clone();
        let Ok(phrase) = crate::corpus::extract_phrase(&sentence.tokens, &anchor, window, 0)
        else {
            stats.skipped += 1;
            continue;
        };
        if phrase.tokens.contains(&keyword) {
            stats.skipped += 1;
            continue;
        }
        stats.emitted += 1;
        records.push(FinetuneRecord {
            keyword,
            phrase: phrase.tokens,
            sentence: sentence.tokens.clone(),
        });
    }
    (records, stats)
}

//! Homographic-to-homophonic conversion.
//!
//! A homographic task gives one spelling and two sense definitions. Phrases
//! retrieved for the surface word are sense-tagged with a WSD backend; a
//! reverse dictionary turns each definition into a substitute word. The task
//! then runs as a homophonic one: the substitutes parameterize ranking,
//! labeling, and steering: while the surface word is what actually appears
//! in the phrase and the final sentence.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, LmBackend};
use crate::corpus::{Corpus, Phrase};
use crate::embedding::EmbeddingTable;
use crate::select::{
    rank_phrases, retrieve_phrases, select_context_word_from, selection_from_ranking,
    ContextSelection, PhraseSelection, SelectError,
};
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("sense definitions must be non-empty and distinct")]
    BadSenseDefinitions,
    #[error("phrase from sentence {0} does not contain the surface word")]
    SurfaceMissing(usize),
    #[error("reverse dictionary found no substitute for sense {0}: {1:?}")]
    NoSubstitute(usize, String),
    #[error("cannot satisfy substitute distinctness for sense 2")]
    SubstituteClash,
    #[error("no phrases tagged with sense 2; nothing to rank")]
    NoSense2Phrases,
    #[error("no sentences tagged with sense 1; no context-word source")]
    NoSense1Sentences,
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("sense file line {0}: {1}")]
    BadRecord(usize, String),
}

/// Surface word with its two sense definitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensePair {
    pub surface: String,
    pub definition_1: String,
    pub definition_2: String,
}

impl SensePair {
    pub fn new(surface: &str, definition_1: &str, definition_2: &str) -> Result<Self, BridgeError> {
        if definition_1.trim().is_empty()
            || definition_2.trim().is_empty()
            || definition_1.trim() == definition_2.trim()
        {
            return Err(BridgeError::BadSenseDefinitions);
        }
        Ok(Self {
            surface: surface.to_lowercase(),
            definition_1: definition_1.trim().to_string(),
            definition_2: definition_2.trim().to_string(),
        })
    }
}

/// Load a JSONL sense-definition file, one task per line.
pub fn load_sense_file(path: &Path) -> Result<Vec<SensePair>, BridgeError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: SensePair = serde_json::from_str(&line)
            .map_err(|e| BridgeError::BadRecord(lineno + 1, e.to_string()))?;
        out.push(SensePair::new(&raw.surface, &raw.definition_1, &raw.definition_2)?);
    }
    Ok(out)
}

/// Substitute words standing in for the two senses, with their reverse
/// dictionary scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutePair {
    pub sub_pw: String,
    pub sub_aw: String,
    pub score_pw: f64,
    pub score_aw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenseTag {
    Sense1,
    Sense2,
    Unknown,
}

/// Scores a definition against a word occurrence in context.
pub trait WsdBackend {
    fn score(
        &self,
        phrase_tokens: &[String],
        anchor: usize,
        definition: &str,
    ) -> Result<f64, BackendError>;
}

/// Gloss-similarity WSD: mean embedding cosine between phrase content words
/// (anchor excluded) and definition content words.
pub struct GlossCosineWsd<'a> {
    pub emb: &'a EmbeddingTable,
}

impl WsdBackend for GlossCosineWsd<'_> {
    fn score(
        &self,
        phrase_tokens: &[String],
        anchor: usize,
        definition: &str,
    ) -> Result<f64, BackendError> {
        let def_tokens = text::tokenize(definition);
        let def_words: Vec<&String> = text::content_words(&def_tokens);
        let mut total = 0.0;
        let mut pairs = 0usize;
        for (i, tok) in phrase_tokens.iter().enumerate() {
            if i == anchor || !text::is_word(tok) || crate::stopwords::is_stopword(tok) {
                continue;
            }
            for dw in &def_words {
                if let Some(c) = self.emb.cosine(tok, dw) {
                    total += c;
                    pairs += 1;
                }
            }
        }
        if pairs == 0 {
            return Ok(0.0);
        }
        Ok(total / pairs as f64)
    }
}

/// Fixed scores for tests: `score_1` for the first definition seen,
/// `score_2` for any other.
pub struct MockWsd {
    pub definition_1: String,
    pub score_1: f64,
    pub score_2: f64,
}

impl WsdBackend for MockWsd {
    fn score(
        &self,
        _phrase_tokens: &[String],
        _anchor: usize,
        definition: &str,
    ) -> Result<f64, BackendError> {
        if definition == self.definition_1 {
            Ok(self.score_1)
        } else {
            Ok(self.score_2)
        }
    }
}

/// Tag each phrase with the sense whose definition scores higher; score
/// margins under `epsilon` (after pairwise normalization) come back
/// `Unknown`.
pub fn disambiguate_phrases(
    phrases: &[Phrase],
    sense: &SensePair,
    wsd: &dyn WsdBackend,
    epsilon: f64,
) -> Result<Vec<(Phrase, SenseTag)>, BridgeError> {
    let mut out = Vec::with_capacity(phrases.len());
    for phrase in phrases {
        if phrase.anchor() != sense.surface {
            return Err(BridgeError::SurfaceMissing(phrase.source_sentence_id));
        }
        let s1 = wsd.score(&phrase.tokens, phrase.anchor_position, &sense.definition_1)?;
        let s2 = wsd.score(&phrase.tokens, phrase.anchor_position, &sense.definition_2)?;
        // Laplace-style pairwise normalization keeps zero/zero at 0.5.
        let n1 = (s1 - s2) / (s1.abs() + s2.abs() + 1e-9);
        let tag = if n1.abs() < epsilon {
            SenseTag::Unknown
        } else if n1 > 0.0 {
            SenseTag::Sense1
        } else {
            SenseTag::Sense2
        };
        out.push((phrase.clone(), tag));
    }
    Ok(out)
}

/// Definition-to-word lookup service.
pub trait ReverseDictBackend {
    /// Ranked (word, score) candidates for a definition, best first.
    fn lookup(&self, definition: &str) -> Result<Vec<(String, f64)>, BackendError>;
}

/// Mock seeded with fixed candidates per definition.
pub struct MockReverseDict {
    entries: HashMap<String, Vec<(String, f64)>>,
}

impl MockReverseDict {
    pub fn new() -> Self {
        Self {
            entries: HashMap::new(),
        }
    }

    pub fn with_entry(mut self, definition: &str, candidates: &[(&str, f64)]) -> Self {
        self.entries.insert(
            definition.trim().to_string(),
            candidates.iter().map(|(w, s)| (w.to_string(), *s)).collect(),
        );
        self
    }
}

impl Default for MockReverseDict {
    fn default() -> Self {
        Self::new()
    }
}

impl ReverseDictBackend for MockReverseDict {
    fn lookup(&self, definition: &str) -> Result<Vec<(String, f64)>, BackendError> {
        Ok(self
            .entries
            .get(definition.trim())
            .cloned()
            .unwrap_or_default())
    }
}

/// Lexicon-backed reverse dictionary: entries are (word, gloss) records;
/// candidates are ranked by IDF-weighted content-word overlap between the
/// query definition and each gloss.
pub struct LexiconReverseDict {
    entries: Vec<(String, Vec<String>)>,
    doc_freq: HashMap<String, usize>,
}

#[derive(Deserialize)]
struct LexiconRecord {
    word: String,
    definition: String,
}

impl LexiconReverseDict {
    pub fn load(path: &Path) -> Result<Self, BridgeError> {
        let file = std::fs::File::open(path)?;
        let mut entries = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LexiconRecord = serde_json::from_str(&line)
                .map_err(|e| BridgeError::BadRecord(lineno + 1, e.to_string()))?;
            let word = rec.word.to_lowercase();
            if word.contains(char::is_whitespace) {
                continue; // multiword entries never become substitutes
            }
            let gloss_tokens = text::tokenize(&rec.definition);
            let gloss: Vec<String> = text::content_words(&gloss_tokens)
                .into_iter()
                .cloned()
                .collect();
            entries.push((word, gloss));
        }
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        for (_, gloss) in &entries {
            let mut distinct: Vec<&String> = gloss.iter().collect();
            distinct.sort();
            distinct.dedup();
            for w in distinct {
                *doc_freq.entry(w.clone()).or_insert(0) += 1;
            }
        }
        Ok(Self { entries, doc_freq })
    }
}

impl ReverseDictBackend for LexiconReverseDict {
    fn lookup(&self, definition: &str) -> Result<Vec<(String, f64)>, BackendError> {
        let query_tokens = text::tokenize(definition);
        let query: Vec<&String> = text::content_words(&query_tokens);
        let n = self.entries.len() as f64;
        let mut scored: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|(word, gloss)| {
                let mut score = 0.0;
                for q in &query {
                    if gloss.iter().any(|g| g == *q) {
                        let df = self.doc_freq.get(*q).copied().unwrap_or(1) as f64;
                        score += (n / df).ln().max(0.1);
                    }
                }
                (word.clone(), score)
            })
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        Ok(scored)
    }
}

/// Top-k single-word candidates for a definition, excluding the surface
/// word. Empty results are an error: the sense has no usable substitute.
pub fn reverse_lookup(
    definition: &str,
    surface: &str,
    backend: &dyn ReverseDictBackend,
    k: usize,
    sense_index: usize,
) -> Result<Vec<(String, f64)>, BridgeError> {
    if definition.trim().is_empty() {
        return Err(BridgeError::BadSenseDefinitions);
    }
    let surface = surface.to_lowercase();
    let mut out: Vec<(String, f64)> = backend
        .lookup(definition)?
        .into_iter()
        .filter(|(w, _)| !w.contains(char::is_whitespace))
        .filter(|(w, _)| w.to_lowercase() != surface)
        .take(k)
        .collect();
    if out.is_empty() {
        return Err(BridgeError::NoSubstitute(
            sense_index,
            definition.chars().take(40).collect(),
        ));
    }
    for (w, _) in &mut out {
        *w = w.to_lowercase();
    }
    Ok(out)
}

/// Everything the generator needs, produced from a sense pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conversion {
    pub substitutes: SubstitutePair,
    /// Median-ranked sense-2 phrase; the anchor still holds the surface word.
    pub phrase: PhraseSelection,
    pub context: ContextSelection,
    pub sense1_sentences: Vec<usize>,
    pub sense2_sentences: Vec<usize>,
}

/// Conversion parameters, mirroring the homophonic pipeline's.
#[derive(Debug, Clone)]
pub struct ConvertParams {
    pub n1: usize,
    pub n2: usize,
    pub window: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub lookup_k: usize,
}

impl Default for ConvertParams {
    fn default() -> Self {
        Self {
            n1: 20,
            n2: 20,
            window: 3,
            seed: 0,
            epsilon: 0.05,
            lookup_k: 10,
        }
    }
}

/// Run the full conversion: substitutes via reverse dictionary, phrase from
/// sense-2-tagged candidates ranked with the substitutes, context word from
/// sense-1-tagged sentences.
pub fn convert(
    sense: &SensePair,
    corpus: &Corpus,
    wsd: &dyn WsdBackend,
    rd: &dyn ReverseDictBackend,
    lm: &dyn LmBackend,
    params: &ConvertParams,
) -> Result<Conversion, BridgeError> {
    let cands1 = reverse_lookup(&sense.definition_1, &sense.surface, rd, params.lookup_k, 1)?;
    let cands2 = reverse_lookup(&sense.definition_2, &sense.surface, rd, params.lookup_k, 2)?;
    let (sub_pw, score_pw) = cands1[0].clone();
    let (sub_aw, score_aw) = if cands2[0].0 != sub_pw {
        cands2[0].clone()
    } else {
        // Identical winners: sense 2 takes its runner-up.
        cands2.get(1).cloned().ok_or(BridgeError::SubstituteClash)?
    };
    let substitutes = SubstitutePair {
        sub_pw,
        sub_aw,
        score_pw,
        score_aw,
    };

    let phrases = retrieve_phrases(corpus, &sense.surface, params.n1, params.window)?;
    let tagged = disambiguate_phrases(&phrases, sense, wsd, params.epsilon)?;
    let sense1_sentences: Vec<usize> = tagged
        .iter()
        .filter(|(_, t)| *t == SenseTag::Sense1)
        .map(|(p, _)| p.source_sentence_id)
        .collect();
    let sense2_phrases: Vec<Phrase> = tagged
        .iter()
        .filter(|(_, t)| *t == SenseTag::Sense2)
        .map(|(p, _)| p.clone())
        .collect();
    let sense2_sentences: Vec<usize> =
        sense2_phrases.iter().map(|p| p.source_sentence_id).collect();
    if sense2_phrases.is_empty() {
        return Err(BridgeError::NoSense2Phrases);
    }
    if sense1_sentences.is_empty() {
        return Err(BridgeError::NoSense1Sentences);
    }

    let ranking = rank_phrases(sense2_phrases, &substitutes.sub_aw, &substitutes.sub_pw, lm)?;
    // The surface word stays in the phrase; substitutes only steer.
    let phrase = selection_from_ranking(&ranking, &sense.surface);

    let context = select_context_word_from(
        corpus,
        &sense1_sentences,
        &sense2_sentences,
        &[
            sense.surface.as_str(),
            substitutes.sub_pw.as_str(),
            substitutes.sub_aw.as_str(),
        ],
        params.n2,
        params.seed,
        0,
    )?;

    Ok(Conversion {
        substitutes,
        phrase,
        context,
        sense1_sentences,
        sense2_sentences,
    })
}

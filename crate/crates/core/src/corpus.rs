//! Non-pun corpus: ingestion, sentence segmentation, inverted index, and
//! phrase windows.
//!
//! The corpus is immutable once built; every read path is borrow-only, so
//! unlimited concurrent readers are fine. A snapshot directory holds
//! `sentences.jsonl` (id, text) and `index.jsonl` (word, postings).

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("empty corpus: no sentences after segmentation")]
    Empty,
    #[error("target word {0:?} not found in sentence")]
    TargetNotFound(String),
    #[error("window {0} yields a phrase shorter than 2 tokens")]
    DegenerateWindow(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot line {0} is not valid: {1}")]
    BadSnapshot(usize, String),
}

/// One segmented sentence: raw text for display, lowercase tokens for
/// everything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub raw: String,
    pub tokens: Vec<String>,
}

/// A contiguous window around a target word occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phrase {
    pub tokens: Vec<String>,
    pub anchor_position: usize,
    pub source_sentence_id: usize,
}

impl Phrase {
    pub fn anchor(&self) -> &str {
        &self.tokens[self.anchor_position]
    }

    /// The phrase with its anchor replaced by `word`.
    pub fn with_anchor(&self, word: &str) -> Vec<String> {
        let mut tokens = self.tokens.clone();
        tokens[self.anchor_position] = word.to_lowercase();
        tokens
    }

    /// The phrase with its anchor replaced by the mask placeholder.
    pub fn masked(&self) -> Vec<String> {
        self.with_anchor(crate::backend::MASK_TOKEN)
    }
}

/// Sentences plus an inverted index from lowercase word to sorted sentence
/// ids.
#[derive(Debug, Clone)]
pub struct Corpus {
    sentences: Vec<Sentence>,
    index: HashMap<String, Vec<usize>>,
}

const EMPTY_POSTINGS: &[usize] = &[];

impl Corpus {
    /// Build from raw text. Mean non-empty line length decides the format:
    /// short lines are sentence-per-line records (segmented individually,
    /// never joined), long lines are running text joined before
    /// segmentation.
    pub fn ingest(text: &str) -> Result<Self, CorpusError> {
        Self::from_raw_sentences(split_stream(text))
    }

    /// Concatenate several files, each format-detected independently.
    pub fn ingest_files(paths: &[impl AsRef<Path>]) -> Result<Self, CorpusError> {
        let mut raw = Vec::new();
        for path in paths {
            let content = std::fs::read_to_string(path)?;
            raw.extend(split_stream(&content));
        }
        Self::from_raw_sentences(raw)
    }

    fn from_raw_sentences(raw_sentences: Vec<String>) -> Result<Self, CorpusError> {
        let sentences: Vec<Sentence> = raw_sentences
            .into_iter()
            .filter_map(|raw| {
                let tokens = text::tokenize(&raw);
                if tokens.iter().any(|t| text::is_word(t)) {
                    Some(Sentence { raw, tokens })
                } else {
                    None
                }
            })
            .collect();
        if sentences.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (id, sent) in sentences.iter().enumerate() {
            for tok in &sent.tokens {
                if !text::is_word(tok) {
                    continue;
                }
                let postings = index.entry(tok.clone()).or_default();
                if postings.last() != Some(&id) {
                    postings.push(id);
                }
            }
        }
        Ok(Self { sentences, index })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, id: usize) -> &Sentence {
        &self.sentences[id]
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    /// Tokenized sentences, for model training.
    pub fn token_sentences(&self) -> Vec<Vec<String>> {
        self.sentences.iter().map(|s| s.tokens.clone()).collect()
    }

    /// Sorted ids of sentences containing `word` as a whole token,
    /// case-folded. Unknown words give an empty slice.
    pub fn sentences_containing(&self, word: &str) -> &[usize] {
        self.index
            .get(&word.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(EMPTY_POSTINGS)
    }

    /// Number of sentences containing `word`.
    pub fn doc_freq(&self, word: &str) -> usize {
        self.sentences_containing(word).len()
    }

    /// Write `sentences.jsonl` and `index.jsonl` under `dir`.
    pub fn save_snapshot(&self, dir: &Path) -> Result<(), CorpusError> {
        std::fs::create_dir_all(dir)?;
        let mut sf = std::fs::File::create(dir.join("sentences.jsonl"))?;
        for (id, sent) in self.sentences.iter().enumerate() {
            let rec = SentenceRecord {
                id,
                text: sent.raw.clone(),
            };
            writeln!(sf, "{}", serde_json::to_string(&rec).unwrap())?;
        }
        let mut inf = std::fs::File::create(dir.join("index.jsonl"))?;
        let mut words: Vec<&String> = self.index.keys().collect();
        words.sort();
        for word in words {
            let rec = IndexRecord {
                word: word.clone(),
                postings: self.index[word].clone(),
            };
            writeln!(inf, "{}", serde_json::to_string(&rec).unwrap())?;
        }
        Ok(())
    }

    /// Rebuild from a snapshot directory. The index is recomputed from the
    /// sentences, so a stale `index.jsonl` cannot poison lookups.
    pub fn load_snapshot(dir: &Path) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(dir.join("sentences.jsonl"))?;
        let mut raw = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SentenceRecord = serde_json::from_str(&line)
                .map_err(|e| CorpusError::BadSnapshot(lineno + 1, e.to_string()))?;
            raw.push(rec.text);
        }
        Self::from_raw_sentences(raw)
    }
}

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    id: usize,
    text: String,
}

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    word: String,
    postings: Vec<usize>,
}

/// Extract the window of up to `window` tokens each side of the first
/// occurrence of `target`, clipped at sentence boundaries.
pub fn extract_phrase(
    tokens: &[String],
    target: &str,
    window: usize,
    source_sentence_id: usize,
) -> Result<Phrase, CorpusError> {
    let target = target.to_lowercase();
    let pos = tokens
        .iter()
        .position(|t| *t == target)
        .ok_or_else(|| CorpusError::TargetNotFound(target.clone()))?;
    let start = pos.saturating_sub(window);
    let end = (pos + window + 1).min(tokens.len());
    if end - start < 2 {
        return Err(CorpusError::DegenerateWindow(window));
    }
    Ok(Phrase {
        tokens: tokens[start..end].to_vec(),
        anchor_position: pos - start,
        source_sentence_id,
    })
}

fn split_stream(text: &str) -> Vec<String> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Vec::new();
    }
    let mean_len = lines.iter().map(|l| l.len()).sum::<usize>() / lines.len();
    if mean_len <= 100 {
        lines.iter().flat_map(|l| segment(l)).collect()
    } else {
        segment(&lines.join(" "))
    }
}

/// Abbreviations whose trailing period does not end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "mt", "jr", "sr", "vs", "etc", "inc", "co", "capt",
    "lt", "gen", "sgt", "rev", "hon", "fig", "no", "vol", "dept", "est", "approx",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word.to_lowercase();
    ABBREVIATIONS.contains(&w.as_str()) || (w.len() == 1 && w.chars().all(char::is_alphabetic))
}

/// Rule-based sentence splitter: terminal punctuation ends a sentence unless
/// it follows a known abbreviation or the next character is lowercase.
fn segment(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '!' || c == '?' || c == '.' {
            // Swallow runs like "?!" or "...".
            let mut j = i;
            while j + 1 < chars.len() && matches!(chars[j + 1], '.' | '!' | '?') {
                j += 1;
            }
            let mut boundary = true;
            if c == '.' && j == i {
                // Look back at the word before the period.
                let mut k = i;
                while k > start && chars[k - 1].is_alphanumeric() {
                    k -= 1;
                }
                let word: String = chars[k..i].iter().collect();
                if is_abbreviation(&word) {
                    boundary = false;
                }
            }
            if boundary {
                // Require whitespace-then-capital or end of text after.
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_whitespace() {
                    k += 1;
                }
                if k < chars.len() && k == j + 1 {
                    boundary = false; // no gap: "3.5", "e.g.x"
                } else if k < chars.len() && chars[k].is_lowercase() {
                    boundary = false;
                }
            }
            if boundary {
                let sentence: String = chars[start..=j].iter().collect();
                let trimmed = sentence.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                start = j + 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let tail: String = chars[start..].iter().collect();
    let tail = tail.trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

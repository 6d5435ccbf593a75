//! Static word embeddings and cosine similarity.
//!
//! Two sources: a GloVe-style text file (`word v1 v2 ... vd` per line), or a
//! table trained here from a tokenized corpus. The trainer builds PPMI
//! co-occurrence weights and projects them onto fixed ternary index vectors
//! derived from each context word's hash (random indexing), so the same
//! corpus always yields the same table, bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::hash::{fnv1a, SplitMix64};
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {0}: expected a word followed by {1} floats")]
    Malformed(usize, usize),
    #[error("vector dimension {got} does not match table dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("cannot train embeddings from an empty corpus")]
    EmptyCorpus,
}

/// Word → dense vector, fixed dimension, case-folded lookups.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

/// Parameters for the corpus trainer.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Vector dimensionality.
    pub dim: usize,
    /// Co-occurrence window, in tokens, on each side.
    pub window: usize,
    /// Nonzero entries per context index vector.
    pub nonzero: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            nonzero: 16,
        }
    }
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f32>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                got: vector.len(),
                want: self.dim,
            });
        }
        self.vectors.insert(word.to_lowercase(), vector);
        Ok(())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(&word.to_lowercase())
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// Cosine similarity; `None` when either word is out of vocabulary or a
    /// vector has zero norm.
    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let va = self.get(a)?;
        let vb = self.get(b)?;
        cosine(va, vb)
    }

    /// Load a GloVe-style text file. A leading `count dim` header line is
    /// tolerated and skipped.
    pub fn load_text(path: &Path) -> Result<Self, EmbeddingError> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut table: Option<EmbeddingTable> = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts
                .next()
                .ok_or(EmbeddingError::Malformed(lineno + 1, 0))?;
            let values: Result<Vec<f32>, _> = parts.map(str::parse::<f32>).collect();
            let values = match values {
                Ok(v) => v,
                // word2vec text headers are "vocab_size dim"
                Err(_) if lineno == 0 && word.parse::<usize>().is_ok() => continue,
                Err(_) => return Err(EmbeddingError::Malformed(lineno + 1, 0)),
            };
            let table = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
            if values.len() != table.dim {
                return Err(EmbeddingError::Malformed(lineno + 1, table.dim));
            }
            table.vectors.insert(word.to_lowercase(), values);
        }
        table.ok_or(EmbeddingError::EmptyCorpus)
    }

    pub fn save_text(&self, path: &Path) -> Result<(), EmbeddingError> {
        let mut file = std::fs::File::create(path)?;
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        for word in words {
            let vec = &self.vectors[word];
            let mut line = word.clone();
            for v in vec {
                line.push(' ');
                line.push_str(&format!("{v}"));
            }
            line.push('\n');
            file.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Train a table from tokenized sentences.
    ///
    /// Counts co-occurrences within `cfg.window`, weights them by positive
    /// PMI, and accumulates each context's signed index vector. All
    /// iteration runs in sorted vocabulary order so float accumulation is
    /// reproducible.
    pub fn train(sentences: &[Vec<String>], cfg: &TrainConfig) -> Result<Self, EmbeddingError> {
        // Sorted vocabulary of word tokens.
        let mut vocab: Vec<String> = {
            let mut set: Vec<&String> = sentences
                .iter()
                .flatten()
                .filter(|t| text::is_word(t))
                .collect();
            set.sort();
            set.dedup();
            set.into_iter().cloned().collect()
        };
        vocab.dedup();
        if vocab.is_empty() {
            return Err(EmbeddingError::EmptyCorpus);
        }
        let index_of: HashMap<&str, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i as u32))
            .collect();

        let mut pair_counts: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); vocab.len()];
        let mut word_totals = vec![0f64; vocab.len()];
        let mut grand_total = 0f64;

        for sent in sentences {
            let ids: Vec<Option<u32>> = sent
                .iter()
                .map(|t| index_of.get(t.as_str()).copied())
                .collect();
            for (i, id) in ids.iter().enumerate() {
                let Some(w) = *id else { continue };
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window + 1).min(ids.len());
                for (j, cid) in ids.iter().enumerate().take(hi).skip(lo) {
                    if i == j {
                        continue;
                    }
                    let Some(c) = *cid else { continue };
                    *pair_counts[w as usize].entry(c).or_insert(0.0) += 1.0;
                    word_totals[w as usize] += 1.0;
                    grand_total += 1.0;
                }
            }
        }
        if grand_total == 0.0 {
            return Err(EmbeddingError::EmptyCorpus);
        }

        // Context totals equal word totals by symmetry of the window.
        let context_totals = &word_totals;

        // Fixed ternary index vector per context word, derived from its hash.
        let index_vector = |word: &str| -> Vec<(usize, f32)> {
            let mut rng = SplitMix64::new(fnv1a(word.as_bytes()));
            let mut entries = Vec::with_capacity(cfg.nonzero);
            for _ in 0..cfg.nonzero {
                let pos = rng.next_index(cfg.dim);
                let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
                entries.push((pos, sign));
            }
            entries
        };
        let context_indices: Vec<Vec<(usize, f32)>> =
            vocab.iter().map(|w| index_vector(w)).collect();

        let mut table = EmbeddingTable::new(cfg.dim);
        for (wid, word) in vocab.iter().enumerate() {
            let mut vec = vec![0f32; cfg.dim];
            for (&cid, &count) in &pair_counts[wid] {
                let pmi = (count * grand_total
                    / (word_totals[wid] * context_totals[cid as usize]))
                    .ln();
                if pmi <= 0.0 {
                    continue;
                }
                for &(pos, sign) in &context_indices[cid as usize] {
                    vec[pos] += (pmi as f32) * sign;
                }
            }
            let norm = vec.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut vec {
                    *v = (*v as f64 / norm) as f32;
                }
            }
            table.vectors.insert(word.clone(), vec);
        }
        Ok(table)
    }
}

/// Plain cosine over two slices.
pub fn cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut dot = 0f64;
    let mut na = 0f64;
    let mut nb = 0f64;
    for (x, y) in a.iter().zip(b) {
        dot += f64::from(*x) * f64::from(*y);
        na += f64::from(*x) * f64::from(*x);
        nb += f64::from(*y) * f64::from(*y);
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(dot / (na.sqrt() * nb.sqrt()))
}

//! Ambiguity, distinctiveness, and surprisal-ratio metrics.
//!
//! The meaning posterior treats each content word (pun and alternative word
//! occurrences excluded) as evidence: relatedness toward a meaning is
//! `exp(cosine)`, multiplied over words and normalized pairwise: in log
//! space that is a sigmoid of the summed cosine difference. Ambiguity is the
//! binary entropy of that posterior, distinctiveness the average mass of
//! words leaning past 0.5 toward each side, both scaled by 100 by default.
//! The surprisal ratio compares how unexpected the pun word is (relative to
//! the alternative) in a short local window versus the whole preceding
//! sentence: `S = 1 − S_global / S_local` when the local gap is positive,
//! and a penalized negative value otherwise.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, LmBackend, PunPair};
use crate::embedding::EmbeddingTable;
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("no usable content words besides the pun pair; posterior undefined")]
    UndefinedPosterior,
    #[error("pun word {0:?} does not occur in the sentence")]
    PunWordAbsent(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("records line {0}: {1}")]
    BadRecord(usize, String),
}

/// Metric constants, all overridable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricParams {
    /// Multiplier applied to ambiguity and distinctiveness.
    pub scale: f64,
    /// Stabilizer for the penalized surprisal branch.
    pub epsilon: f64,
    /// Tokens of local context preceding the pun word.
    pub local_window: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            scale: 100.0,
            epsilon: 1e-6,
            local_window: 2,
        }
    }
}

/// Posterior over the two meanings given the sentence's content words.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeaningPosterior {
    pub p_m1: f64,
    pub p_m2: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Content words used as meaning evidence: word tokens that are neither
/// stopwords nor literal occurrences of the pair, and are in vocabulary.
fn evidence_words<'a>(
    tokens: &'a [String],
    pair: &PunPair,
    emb: &EmbeddingTable,
) -> Vec<&'a String> {
    tokens
        .iter()
        .filter(|t| text::is_word(t) && !crate::stopwords::is_stopword(t))
        .filter(|t| **t != pair.pw && **t != pair.aw)
        .filter(|t| emb.contains(t) && emb.contains(&pair.pw) && emb.contains(&pair.aw))
        .collect()
}

/// P(meaning | content words), computed in log space.
pub fn meaning_posterior(
    tokens: &[String],
    pair: &PunPair,
    emb: &EmbeddingTable,
) -> Result<MeaningPosterior, MetricError> {
    let words = evidence_words(tokens, pair, emb);
    if words.is_empty() {
        return Err(MetricError::UndefinedPosterior);
    }
    let mut toward_pw = 0.0;
    let mut toward_aw = 0.0;
    for w in words {
        toward_pw += emb.cosine(w, &pair.pw).unwrap_or(0.0);
        toward_aw += emb.cosine(w, &pair.aw).unwrap_or(0.0);
    }
    let p_m1 = sigmoid(toward_pw - toward_aw);
    Ok(MeaningPosterior {
        p_m1,
        p_m2: 1.0 - p_m1,
    })
}

/// Binary entropy of the posterior, in bits, times `scale`.
pub fn ambiguity_of(posterior: &MeaningPosterior, scale: f64) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    scale * (h(posterior.p_m1) + h(posterior.p_m2))
}

/// Ambiguity of a sentence.
pub fn ambiguity(
    tokens: &[String],
    pair: &PunPair,
    emb: &EmbeddingTable,
    params: &MetricParams,
) -> Result<f64, MetricError> {
    Ok(ambiguity_of(&meaning_posterior(tokens, pair, emb)?, params.scale))
}

/// Distinctiveness toward the pun word (D1) and alternative word (D2): the
/// average excess relatedness share past the midpoint, times `scale`.
/// Swapping the pair swaps the two values exactly.
pub fn distinctiveness(
    tokens: &[String],
    pair: &PunPair,
    emb: &EmbeddingTable,
    params: &MetricParams,
) -> Result<(f64, f64), MetricError> {
    let words = evidence_words(tokens, pair, emb);
    if words.is_empty() {
        return Err(MetricError::UndefinedPosterior);
    }
    let n = words.len() as f64;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for w in words {
        let toward_pw = emb.cosine(w, &pair.pw).unwrap_or(0.0);
        let toward_aw = emb.cosine(w, &pair.aw).unwrap_or(0.0);
        let share_pw = sigmoid(toward_pw - toward_aw);
        let share_aw = sigmoid(toward_aw - toward_pw);
        d1 += (share_pw - 0.5).max(0.0);
        d2 += (share_aw - 0.5).max(0.0);
    }
    Ok((params.scale * d1 / n, params.scale * d2 / n))
}

/// Local-vs-global surprisal ratio for the pun word against the
/// alternative. Positive local gap: `1 − S_global/S_local`; otherwise the
/// penalized branch `−|S_global| / (|S_local| + ε)`, which goes negative.
pub fn surprisal_ratio(
    tokens: &[String],
    pair: &PunPair,
    lm: &dyn LmBackend,
    params: &MetricParams,
) -> Result<f64, MetricError> {
    let pos = tokens
        .iter()
        .position(|t| *t == pair.pw)
        .ok_or_else(|| MetricError::PunWordAbsent(pair.pw.clone()))?;
    let local_start = pos.saturating_sub(params.local_window);
    let local = &tokens[local_start..pos];
    let global = &tokens[..pos];
    let s_local = lm.word_surprisal(local, &pair.pw)? - lm.word_surprisal(local, &pair.aw)?;
    let s_global = lm.word_surprisal(global, &pair.pw)? - lm.word_surprisal(global, &pair.aw)?;
    if s_local > 0.0 {
        Ok(1.0 - s_global / s_local)
    } else {
        Ok(-s_global.abs() / (s_local.abs() + params.epsilon))
    }
}

/// One sentence to evaluate, tagged with the system that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sentence: String,
    pub pw: String,
    pub aw: String,
    pub system: String,
}

/// Per-system metric means plus exclusion counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRow {
    pub system: String,
    pub n: usize,
    pub ambiguity: f64,
    pub d1: f64,
    pub d2: f64,
    pub avg_d: f64,
    pub surprisal: f64,
    pub excluded_ambiguity: usize,
    pub excluded_distinctiveness: usize,
    pub excluded_surprisal: usize,
}

/// Corpus-level report: one row per system, sorted by system name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumorReport {
    pub rows: Vec<SystemRow>,
}

/// Evaluate records grouped by system. Sentences where a metric is
/// undefined are excluded from that metric's mean and counted.
pub fn evaluate_corpus(
    records: &[EvalRecord],
    emb: &EmbeddingTable,
    lm: &dyn LmBackend,
    params: &MetricParams,
) -> Result<HumorReport, MetricError> {
    struct Acc {
        n: usize,
        a: (f64, usize),
        d1: f64,
        d2: f64,
        d_n: usize,
        d_skip: usize,
        s: (f64, usize),
        a_skip: usize,
        s_skip: usize,
    }
    let mut by_system: BTreeMap<String, Acc> = BTreeMap::new();
    for rec in records {
        let tokens = text::tokenize(&rec.sentence);
        let pair = PunPair::new(&rec.pw, &rec.aw);
        let acc = by_system.entry(rec.system.clone()).or_insert(Acc {
            n: 0,
            a: (0.0, 0),
            d1: 0.0,
            d2: 0.0,
            d_n: 0,
            d_skip: 0,
            s: (0.0, 0),
            a_skip: 0,
            s_skip: 0,
        });
        acc.n += 1;
        match ambiguity(&tokens, &pair, emb, params) {
            Ok(a) => {
                acc.a.0 += a;
                acc.a.1 += 1;
            }
            Err(_) => acc.a_skip += 1,
        }
        match distinctiveness(&tokens, &pair, emb, params) {
            Ok((d1, d2)) => {
                acc.d1 += d1;
                acc.d2 += d2;
                acc.d_n += 1;
            }
            Err(_) => acc.d_skip += 1,
        }
        match surprisal_ratio(&tokens, &pair, lm, params) {
            Ok(s) => {
                acc.s.0 += s;
                acc.s.1 += 1;
            }
            Err(_) => acc.s_skip += 1,
        }
    }
    let rows = by_system
        .into_iter()
        .map(|(system, acc)| {
            let mean = |sum: f64, n: usize| if n > 0 { sum / n as f64 } else { f64::NAN };
            let d1 = mean(acc.d1, acc.d_n);
            let d2 = mean(acc.d2, acc.d_n);
            SystemRow {
                system,
                n: acc.n,
                ambiguity: mean(acc.a.0, acc.a.1),
                d1,
                d2,
                avg_d: (d1 + d2) / 2.0,
                surprisal: mean(acc.s.0, acc.s.1),
                excluded_ambiguity: acc.a_skip,
                excluded_distinctiveness: acc.d_skip,
                excluded_surprisal: acc.s_skip,
            }
        })
        .collect();
    Ok(HumorReport { rows })
}

/// Read evaluation records from JSONL.
pub fn read_eval_records(path: &Path) -> Result<Vec<EvalRecord>, MetricError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EvalRecord = serde_json::from_str(&line)
            .map_err(|e| MetricError::BadRecord(lineno + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Write the report as CSV: system, n, A, D1, D2, Avg D, S, exclusions.
pub fn write_csv(report: &HumorReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "system,n,ambiguity,d1,d2,avg_d,surprisal,excluded_ambiguity,excluded_distinctiveness,excluded_surprisal"
    )?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{}",
            row.system,
            row.n,
            row.ambiguity,
            row.d1,
            row.d2,
            row.avg_d,
            row.surprisal,
            row.excluded_ambiguity,
            row.excluded_distinctiveness,
            row.excluded_surprisal
        )?;
    }
    Ok(())
}

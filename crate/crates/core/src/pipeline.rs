//! The five pipeline commands behind the CLI: ingest, curate, train,
//! generate, evaluate.
//!
//! Commands are plain functions over a validated [`PipelineConfig`] so they
//! can be driven from tests as easily as from the binary. Output files are
//! written atomically (temp file + rename) and start with a header record
//! carrying the config hash and seed.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backend::{
    BackendError, EmbeddingClassifier, LmBackend, MockClassifier, MockLmBackend, NgramBackend,
    PunPair, QueuedBackend, TokenClassifier,
};
use crate::config::{ConfigError, PipelineConfig};
use crate::corpus::{Corpus, CorpusError};
use crate::embedding::{EmbeddingError, EmbeddingTable, TrainConfig};
use crate::generate::{generate, GenInput, Generation, GenerateError};
use crate::homograph::{
    convert, load_sense_file, BridgeError, ConvertParams, GlossCosineWsd, LexiconReverseDict,
};
use crate::label::{
    build_predictor_dataset, curate_classifier_dataset, read_examples, write_examples,
    LabelError, LabeledExample, PredictorHandle,
};
use crate::metrics::{evaluate_corpus, read_eval_records, write_csv, HumorReport, MetricError};
use crate::select::{select_context_word, select_phrase, SelectError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Input(String),
}

impl PipelineError {
    /// Exit code contract: 2 for validation problems, 1 for runtime
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Input(_) => 2,
            _ => 1,
        }
    }
}

/// Header record embedded at the top of every JSONL output.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunHeader {
    pub config_hash: String,
    pub seed: u64,
}

impl RunHeader {
    fn of(cfg: &PipelineConfig) -> Self {
        Self {
            config_hash: cfg.config_hash(),
            seed: cfg.seed,
        }
    }
}

/// Write bytes to `path` via a temp file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Order-preserving parallel map. With one worker it degenerates to a plain
/// map, so results are identical either way.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk_size = items.len().div_ceil(workers);
    let mut results: Vec<Option<R>> = Vec::with_capacity(items.len());
    results.resize_with(items.len(), || None);
    let slots: Vec<(usize, &mut [Option<R>])> = {
        let mut slots = Vec::new();
        let mut rest = results.as_mut_slice();
        let mut offset = 0;
        while !rest.is_empty() {
            let take = chunk_size.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            slots.push((offset, head));
            offset += take;
            rest = tail;
        }
        slots
    };
    std::thread::scope(|scope| {
        for (offset, slot) in slots {
            let f = &f;
            scope.spawn(move || {
                for (i, out) in slot.iter_mut().enumerate() {
                    *out = Some(f(&items[offset + i]));
                }
            });
        }
    });
    results.into_iter().map(|r| r.unwrap()).collect()
}

/// Build the configured LM backend. The n-gram backend trains on the given
/// corpus; serial backends are queued transparently.
pub fn build_backend(
    cfg: &PipelineConfig,
    corpus: &Corpus,
) -> Result<Box<dyn LmBackend>, PipelineError> {
    let backend: Box<dyn LmBackend> = match cfg.backend.as_str() {
        "mock" => Box::new(MockLmBackend::new()),
        "ngram" => Box::new(NgramBackend::train(
            &corpus.token_sentences(),
            crate::backend::ngram::NgramConfig::default(),
        )?),
        other => {
            return Err(ConfigError::Invalid(vec![format!(
                "backend: unknown {other:?}"
            )])
            .into())
        }
    };
    Ok(QueuedBackend::wrap_if_serial(backend))
}

/// Load or train the embedding table per config.
pub fn build_embeddings(
    cfg: &PipelineConfig,
    corpus: &Corpus,
) -> Result<Arc<EmbeddingTable>, PipelineError> {
    let table = match &cfg.embedding_file {
        Some(path) => EmbeddingTable::load_text(path)?,
        None => EmbeddingTable::train(&corpus.token_sentences(), &TrainConfig::default())?,
    };
    Ok(Arc::new(table))
}

/// Load the trained predictor, or fall back to the hash-seeded mock.
pub fn build_predictor(
    cfg: &PipelineConfig,
    emb: Arc<EmbeddingTable>,
) -> Result<PredictorHandle, PipelineError> {
    let classifier: Box<dyn TokenClassifier> = match &cfg.predictor_dir {
        Some(dir) => Box::new(EmbeddingClassifier::load(dir, emb)?),
        None => Box::new(MockClassifier::hashed(cfg.seed)),
    };
    Ok(PredictorHandle::new(classifier, cfg.confidence_threshold))
}

/// Load the corpus from the snapshot if configured, else ingest the paths.
pub fn load_corpus(cfg: &PipelineConfig) -> Result<Corpus, PipelineError> {
    if let Some(dir) = &cfg.snapshot_dir {
        if dir.join("sentences.jsonl").exists() {
            return Ok(Corpus::load_snapshot(dir)?);
        }
    }
    if cfg.corpus_paths.is_empty() {
        return Err(PipelineError::Input(
            "no corpus: set corpus_paths or snapshot_dir".into(),
        ));
    }
    Ok(Corpus::ingest_files(&cfg.corpus_paths)?)
}

#[derive(Debug, Serialize)]
pub struct IngestSummary {
    pub sentences: usize,
    pub words: usize,
    pub snapshot_dir: PathBuf,
    pub config_hash: String,
}

/// Ingest corpus files and write a snapshot directory.
pub fn cmd_ingest(cfg: &PipelineConfig, out_dir: &Path) -> Result<IngestSummary, PipelineError> {
    cfg.validate()?;
    if cfg.corpus_paths.is_empty() {
        return Err(PipelineError::Input("ingest needs corpus_paths".into()));
    }
    let corpus = Corpus::ingest_files(&cfg.corpus_paths)?;
    corpus.save_snapshot(out_dir)?;
    let header = serde_json::to_string(&RunHeader::of(cfg)).unwrap();
    write_atomic(&out_dir.join("meta.json"), format!("{header}\n").as_bytes())?;
    let words = corpus
        .sentences()
        .iter()
        .map(|s| s.tokens.iter().filter(|t| crate::text::is_word(t)).count())
        .sum();
    Ok(IngestSummary {
        sentences: corpus.len(),
        words,
        snapshot_dir: out_dir.to_path_buf(),
        config_hash: cfg.config_hash(),
    })
}

/// A pun-corpus record for curation: a sentence and its pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PunRecord {
    pub sentence: String,
    pub pw: String,
    pub aw: String,
}

/// Read pun records from JSONL (header lines without a `sentence` field are
/// skipped).
pub fn read_pun_records(path: &Path) -> Result<Vec<PunRecord>, PipelineError> {
    let raw = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PunRecord>(line) {
            Ok(rec) => out.push(rec),
            Err(_) if lineno == 0 => continue,
            Err(e) => {
                return Err(PipelineError::Input(format!(
                    "{} line {}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CurateSummary {
    pub records: usize,
    pub examples: usize,
    pub out_path: PathBuf,
    pub config_hash: String,
}

/// Curate classifier training labels from a pun corpus.
pub fn cmd_curate(
    cfg: &PipelineConfig,
    pun_corpus_path: &Path,
    out_path: &Path,
) -> Result<CurateSummary, PipelineError> {
    cfg.validate()?;
    let corpus = load_corpus(cfg)?;
    let emb = build_embeddings(cfg, &corpus)?;
    let records = read_pun_records(pun_corpus_path)?;
    if records.is_empty() {
        return Err(PipelineError::Input(format!(
            "{} holds no pun records",
            pun_corpus_path.display()
        )));
    }

    let chunks = parallel_map(&records, cfg.workers, |rec| {
        let tokens = crate::text::tokenize(&rec.sentence);
        let pair = PunPair::new(&rec.pw, &rec.aw);
        curate_classifier_dataset(&[(tokens, pair)], &emb, cfg.threshold)
    });
    let examples: Vec<LabeledExample> = chunks.into_iter().flatten().collect();

    let mut body = format!("{}\n", serde_json::to_string(&RunHeader::of(cfg)).unwrap());
    for ex in &examples {
        body.push_str(&serde_json::to_string(ex).unwrap());
        body.push('\n');
    }
    write_atomic(out_path, body.as_bytes())?;
    Ok(CurateSummary {
        records: records.len(),
        examples: examples.len(),
        out_path: out_path.to_path_buf(),
        config_hash: cfg.config_hash(),
    })
}

/// Read a labeled dataset, skipping a leading header record if present.
pub fn read_dataset(path: &Path) -> Result<Vec<LabeledExample>, PipelineError> {
    match read_examples(path) {
        Ok(examples) => Ok(examples),
        Err(LabelError::BadRecord(1, _)) => {
            // Header line first; re-read skipping it.
            let raw = std::fs::read_to_string(path)?;
            let mut out = Vec::new();
            for (lineno, line) in raw.lines().enumerate().skip(1) {
                if line.trim().is_empty() {
                    continue;
                }
                let ex: LabeledExample = serde_json::from_str(line).map_err(|e| {
                    PipelineError::Input(format!("{} line {}: {e}", path.display(), lineno + 1))
                })?;
                out.push(ex);
            }
            Ok(out)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Serialize)]
pub struct TrainSummary {
    pub auto_examples: usize,
    pub human_examples: usize,
    pub predictor_examples: usize,
    pub classifier_accuracy: f64,
    /// Training-set F1 per category (A, D1, D2).
    pub classifier_f1: [f64; 3],
    pub classifier_macro_f1: f64,
    pub out_dir: PathBuf,
    pub config_hash: String,
}

/// Train the current-word classifier on curated labels, vet the automatic
/// labels with it, fold in human annotations, and train the next-type
/// predictor on the result. The predictor handle directory is the output.
pub fn cmd_train(
    cfg: &PipelineConfig,
    auto_path: &Path,
    human_path: Option<&Path>,
    out_dir: &Path,
) -> Result<TrainSummary, PipelineError> {
    cfg.validate()?;
    let corpus = load_corpus(cfg)?;
    let emb = build_embeddings(cfg, &corpus)?;
    let auto = read_dataset(auto_path)?;
    let human = match human_path {
        Some(p) => read_dataset(p)?,
        None => Vec::new(),
    };
    if auto.is_empty() {
        return Err(PipelineError::Input("empty curated dataset".into()));
    }

    let classifier_data: Vec<_> = auto.iter().map(LabeledExample::to_training).collect();
    let classifier = EmbeddingClassifier::train(
        &classifier_data,
        emb.clone(),
        crate::backend::classifier::ClassifierConfig::default(),
    )?;
    let classifier_accuracy = classifier.accuracy(&classifier_data);
    let (classifier_f1, classifier_macro_f1) = classifier.f1_scores(&classifier_data);

    let predictor_examples = build_predictor_dataset(&classifier, &auto, &human)?;
    let predictor_data: Vec<_> = predictor_examples
        .iter()
        .map(LabeledExample::to_predictor_training)
        .collect();
    let predictor = EmbeddingClassifier::train(
        &predictor_data,
        emb,
        crate::backend::classifier::ClassifierConfig::default(),
    )?;
    predictor.save(out_dir)?;
    let header = serde_json::to_string(&RunHeader::of(cfg)).unwrap();
    write_atomic(&out_dir.join("meta.json"), format!("{header}\n").as_bytes())?;
    write_examples(&out_dir.join("predictor_dataset.jsonl"), &predictor_examples)?;

    Ok(TrainSummary {
        auto_examples: auto.len(),
        human_examples: human.len(),
        predictor_examples: predictor_examples.len(),
        classifier_accuracy,
        classifier_f1,
        classifier_macro_f1,
        out_dir: out_dir.to_path_buf(),
        config_hash: cfg.config_hash(),
    })
}

/// What to generate: a plain pair or a homographic sense file.
#[derive(Debug, Clone)]
pub enum GenerateTask {
    Homophonic { pw: String, aw: String },
    Homographic { sense_file: PathBuf },
}

/// Audit record written before each generation: where the phrase and
/// context word came from, with ranks, probabilities, pool, and seed.
#[derive(Debug, Serialize)]
pub struct TaskProvenance {
    pub record: &'static str,
    pub task: usize,
    pub phrase_selection: crate::select::PhraseSelection,
    pub context_selection: crate::select::ContextSelection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substitutes: Option<crate::homograph::SubstitutePair>,
}

#[derive(Debug, Serialize)]
pub struct GenerateSummary {
    pub generations: usize,
    pub out_path: PathBuf,
    pub config_hash: String,
}

/// Run selection plus steered decoding and write generation records.
pub fn cmd_generate(
    cfg: &PipelineConfig,
    task: &GenerateTask,
    out_path: &Path,
) -> Result<GenerateSummary, PipelineError> {
    cfg.validate()?;
    let corpus = load_corpus(cfg)?;
    let emb = build_embeddings(cfg, &corpus)?;
    let backend = build_backend(cfg, &corpus)?;
    let predictor = build_predictor(cfg, emb.clone())?;

    let results: Vec<(TaskProvenance, Generation)> = match task {
        GenerateTask::Homophonic { pw, aw } => {
            let pair = PunPair::new(pw, aw);
            let phrase = select_phrase(&corpus, &pair, backend.as_ref(), cfg.n1, cfg.phrase_window)?;
            let context = select_context_word(&corpus, &pair, cfg.n2, cfg.seed)?;
            let input = GenInput::homophonic(
                pair,
                &context.word,
                &phrase.phrase.tokens,
                cfg.decode_config(),
            )?;
            let provenance = TaskProvenance {
                record: "provenance",
                task: 0,
                phrase_selection: phrase,
                context_selection: context,
                substitutes: None,
            };
            vec![(
                provenance,
                generate(&input, &predictor, backend.as_ref(), &emb)?,
            )]
        }
        GenerateTask::Homographic { sense_file } => {
            let senses = load_sense_file(sense_file)?;
            if senses.is_empty() {
                return Err(PipelineError::Input(format!(
                    "{} holds no sense records",
                    sense_file.display()
                )));
            }
            let lexicon_path = cfg.lexicon_file.as_ref().ok_or_else(|| {
                PipelineError::Input("homographic tasks need lexicon_file".into())
            })?;
            let rd = LexiconReverseDict::load(lexicon_path)?;
            let wsd = GlossCosineWsd { emb: &emb };
            let params = ConvertParams {
                n1: cfg.n1,
                n2: cfg.n2,
                window: cfg.phrase_window,
                seed: cfg.seed,
                epsilon: cfg.wsd_epsilon,
                lookup_k: 10,
            };
            let mut out = Vec::new();
            for (task_idx, sense) in senses.iter().enumerate() {
                let conv = convert(sense, &corpus, &wsd, &rd, backend.as_ref(), &params)?;
                let input = GenInput::homographic(
                    PunPair::new(&conv.substitutes.sub_pw, &conv.substitutes.sub_aw),
                    &sense.surface,
                    &conv.context.word,
                    &conv.phrase.phrase.tokens,
                    cfg.decode_config(),
                )?;
                let provenance = TaskProvenance {
                    record: "provenance",
                    task: task_idx,
                    phrase_selection: conv.phrase,
                    context_selection: conv.context,
                    substitutes: Some(conv.substitutes),
                };
                out.push((
                    provenance,
                    generate(&input, &predictor, backend.as_ref(), &emb)?,
                ));
            }
            out
        }
    };

    let mut body = format!("{}\n", serde_json::to_string(&RunHeader::of(cfg)).unwrap());
    for (provenance, generation) in &results {
        body.push_str(&serde_json::to_string(provenance).unwrap());
        body.push('\n');
        body.push_str(&serde_json::to_string(generation).unwrap());
        body.push('\n');
    }
    write_atomic(out_path, body.as_bytes())?;
    Ok(GenerateSummary {
        generations: results.len(),
        out_path: out_path.to_path_buf(),
        config_hash: cfg.config_hash(),
    })
}

#[derive(Debug, Serialize)]
pub struct EvaluateSummary {
    pub records: usize,
    pub systems: usize,
    pub out_path: PathBuf,
    pub config_hash: String,
}

/// Compute the metric table for tagged records and write it as CSV.
pub fn cmd_evaluate(
    cfg: &PipelineConfig,
    records_path: &Path,
    out_path: &Path,
) -> Result<(HumorReport, EvaluateSummary), PipelineError> {
    cfg.validate()?;
    let records = read_eval_records(records_path)?;
    if records.is_empty() {
        return Err(PipelineError::Input(format!(
            "{} holds no evaluation records",
            records_path.display()
        )));
    }
    let corpus = load_corpus(cfg)?;
    let emb = build_embeddings(cfg, &corpus)?;
    let backend = build_backend(cfg, &corpus)?;
    let report = evaluate_corpus(&records, &emb, backend.as_ref(), &cfg.metric_params())?;

    let mut body = Vec::new();
    writeln!(
        body,
        "# config_hash={} seed={}",
        cfg.config_hash(),
        cfg.seed
    )?;
    write_csv(&report, &mut body)?;
    write_atomic(out_path, &body)?;
    Ok((
        report.clone(),
        EvaluateSummary {
            records: records.len(),
            systems: report.rows.len(),
            out_path: out_path.to_path_buf(),
            config_hash: cfg.config_hash(),
        },
    ))
}

//! punkit: generate and score puns from a pun-word/alternative-word pair.
//!
//! Five subcommands run the pipeline stages: `ingest` builds a corpus
//! snapshot, `curate` bootstraps token-type labels, `train` fits the
//! next-type predictor, `generate` produces labeled pun records, and
//! `evaluate` writes the metric table. Every flag mirrors a config-file
//! field; flags win over the file. Exit codes: 0 success, 2 validation
//! error, 1 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use punkit::config::PipelineConfig;
use punkit::pipeline::{
    cmd_curate, cmd_evaluate, cmd_generate, cmd_ingest, cmd_train, GenerateTask, PipelineError,
};

#[derive(Parser)]
#[command(name = "punkit", version, about = "Pun generation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides mirroring `PipelineConfig` one to one.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML config file; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Plain-text corpus files.
    #[arg(long = "corpus-path", num_args = 1..)]
    corpus_paths: Vec<PathBuf>,

    #[arg(long)]
    snapshot_dir: Option<PathBuf>,

    /// Backend: "mock" or "ngram".
    #[arg(long)]
    backend: Option<String>,

    #[arg(long)]
    embedding_file: Option<PathBuf>,

    #[arg(long)]
    predictor_dir: Option<PathBuf>,

    #[arg(long)]
    lexicon_file: Option<PathBuf>,

    #[arg(long)]
    n1: Option<usize>,

    #[arg(long)]
    n2: Option<usize>,

    /// Unsupervised labeling threshold T.
    #[arg(long)]
    threshold: Option<f64>,

    /// Predictor confidence gate T_c.
    #[arg(long)]
    confidence_threshold: Option<f64>,

    #[arg(long)]
    candidate_count: Option<usize>,

    #[arg(long)]
    phrase_window: Option<usize>,

    #[arg(long)]
    local_window: Option<usize>,

    #[arg(long)]
    max_len: Option<usize>,

    #[arg(long)]
    min_len: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if !self.corpus_paths.is_empty() {
            cfg.corpus_paths = self.corpus_paths.clone();
        }
        if let Some(v) = &self.snapshot_dir {
            cfg.snapshot_dir = Some(v.clone());
        }
        if let Some(v) = &self.backend {
            cfg.backend = v.clone();
        }
        if let Some(v) = &self.embedding_file {
            cfg.embedding_file = Some(v.clone());
        }
        if let Some(v) = &self.predictor_dir {
            cfg.predictor_dir = Some(v.clone());
        }
        if let Some(v) = &self.lexicon_file {
            cfg.lexicon_file = Some(v.clone());
        }
        if let Some(v) = self.n1 {
            cfg.n1 = v;
        }
        if let Some(v) = self.n2 {
            cfg.n2 = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = self.confidence_threshold {
            cfg.confidence_threshold = v;
        }
        if let Some(v) = self.candidate_count {
            cfg.candidate_count = v;
        }
        if let Some(v) = self.phrase_window {
            cfg.phrase_window = v;
        }
        if let Some(v) = self.local_window {
            cfg.local_window = v;
        }
        if let Some(v) = self.max_len {
            cfg.max_len = v;
        }
        if let Some(v) = self.min_len {
            cfg.min_len = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a corpus snapshot from plain-text files.
    Ingest {
        #[command(flatten)]
        config: ConfigArgs,
        /// Snapshot output directory.
        #[arg(long, default_value = "snapshot")]
        out: PathBuf,
    },
    /// Curate token-type training labels from a pun corpus.
    Curate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Pun corpus JSONL: {"sentence", "pw", "aw"} per line.
        #[arg(long)]
        puns: PathBuf,
        #[arg(long, default_value = "curated.jsonl")]
        out: PathBuf,
    },
    /// Train the classifier and next-type predictor.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Curated automatic labels (from `curate`).
        #[arg(long)]
        auto: PathBuf,
        /// Optional human annotations in the same JSONL shape.
        #[arg(long)]
        human: Option<PathBuf>,
        /// Predictor handle output directory.
        #[arg(long, default_value = "predictor")]
        out: PathBuf,
    },
    /// Generate a pun for a pair, or for each record of a sense file.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Pun word (appears in the output sentence).
        #[arg(required_unless_present = "senses")]
        pw: Option<String>,
        /// Alternative word.
        #[arg(required_unless_present = "senses")]
        aw: Option<String>,
        /// Homographic sense file: {"surface", "definition_1",
        /// "definition_2"} per line.
        #[arg(long, conflicts_with_all = ["pw", "aw"])]
        senses: Option<PathBuf>,
        #[arg(long, default_value = "generations.jsonl")]
        out: PathBuf,
    },
    /// Score tagged records and write the metric table as CSV.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Records JSONL: {"sentence", "pw", "aw", "system"} per line.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Ingest { config, out } => {
            let cfg = config.resolve()?;
            let summary = cmd_ingest(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Curate { config, puns, out } => {
            let cfg = config.resolve()?;
            let summary = cmd_curate(&cfg, &puns, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Train {
            config,
            auto,
            human,
            out,
        } => {
            let cfg = config.resolve()?;
            let summary = cmd_train(&cfg, &auto, human.as_deref(), &out)?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Generate {
            config,
            pw,
            aw,
            senses,
            out,
        } => {
            let cfg = config.resolve()?;
            let task = match senses {
                Some(sense_file) => GenerateTask::Homographic { sense_file },
                None => GenerateTask::Homophonic {
                    pw: pw.expect("clap enforces pw"),
                    aw: aw.expect("clap enforces aw"),
                },
            };
            let summary = cmd_generate(&cfg, &task, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
        Command::Evaluate {
            config,
            records,
            out,
        } => {
            let cfg = config.resolve()?;
            let (report, summary) = cmd_evaluate(&cfg, &records, &out)?;
            for row in &report.rows {
                println!(
                    "{}: n={} A={:.2} D1={:.2} D2={:.2} AvgD={:.2} S={:.2}",
                    row.system, row.n, row.ambiguity, row.d1, row.d2, row.avg_d, row.surprisal
                );
            }
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

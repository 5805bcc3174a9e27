//! Batch command-line interface: `train`, `eval`, `predict`, `crossval`,
//! `stats` and `synth`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or i/o error,
//! 3 runtime failure. Logs go to standard error as one JSON object per line.

mod commands;
mod config;

pub use config::{parse_config_file, Preset, RunConfig, Source, KEYS};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::model::{BundleError, ModelError};
use crate::training::TrainError;

pub const VERSION: &str = concat!("mner ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Model(m) => m.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(m) => CliError::Usage(m),
            TrainError::TooSmall { .. } | TrainError::Corpus(_) | TrainError::Io(_) => {
                CliError::Data(e.to_string())
            }
            TrainError::Eval(e) => e.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mner",
    version,
    about = "Bi-LSTM tagger for material and process entities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on an IOB corpus and score it on a held-out test share.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Report path; defaults to `<out>.report`.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Save a bundle after every epoch as `<out>.epoch-NNN`.
        #[arg(long)]
        checkpoints: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score a saved model on an IOB corpus.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Tag whitespace-tokenized text, one sentence per line.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Input file; standard input when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// k-fold cross-validation of the network against the most-frequent-tag baseline.
    Crossval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Dataset overview statistics.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic IOB corpus.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        ambiguous_fraction: f64,
        #[arg(long, default_value_t = 0.2)]
        distractor_rate: f64,
        #[arg(long, default_value_t = 20)]
        sentences_per_document: usize,
    },
}

/// Settings shared by the training and scoring commands. Each maps to one
/// configuration key; unset flags fall back to the config file, preset, then
/// built-in defaults.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long = "config")]
    pub config_file: Option<PathBuf>,
    /// paper-algo or paper-text.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub max_len: Option<String>,
    #[arg(long)]
    pub embedding_dim: Option<String>,
    #[arg(long)]
    pub units: Option<String>,
    #[arg(long)]
    pub spatial_dropout: Option<String>,
    #[arg(long)]
    pub recurrent_dropout: Option<String>,
    #[arg(long)]
    pub batch_size: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub validation_split: Option<String>,
    #[arg(long)]
    pub test_fraction: Option<String>,
    /// Epochs without improvement before stopping; `none` disables early stopping.
    #[arg(long)]
    pub patience: Option<String>,
    #[arg(long)]
    pub min_delta: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub learning_rate: Option<String>,
    /// Global gradient-norm clip; `none` disables clipping.
    #[arg(long)]
    pub clip_norm: Option<String>,
    /// Exclude padded positions from the training loss.
    #[arg(long)]
    pub mask_padding: bool,
    /// strict or first-token.
    #[arg(long = "match")]
    pub match_mode: Option<String>,
    /// Cross-validation worker count.
    #[arg(long)]
    pub jobs: Option<String>,
    /// parallel or sequential.
    #[arg(long)]
    pub execution: Option<String>,
    #[arg(short = 'k', long = "folds")]
    pub folds: Option<String>,
}

impl ConfigArgs {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("max_len", &self.max_len);
        push("embedding_dim", &self.embedding_dim);
        push("lstm_units", &self.units);
        push("spatial_dropout", &self.spatial_dropout);
        push("recurrent_dropout", &self.recurrent_dropout);
        push("batch_size", &self.batch_size);
        push("max_epochs", &self.epochs);
        push("validation_split", &self.validation_split);
        push("test_fraction", &self.test_fraction);
        push("patience", &self.patience);
        push("min_delta", &self.min_delta);
        push("seed", &self.seed);
        push("learning_rate", &self.learning_rate);
        push("clip_norm", &self.clip_norm);
        push("match_mode", &self.match_mode);
        push("jobs", &self.jobs);
        push("execution", &self.execution);
        push("folds", &self.folds);
        if self.mask_padding {
            out.push(("mask_padding", "true".into()));
        }
        out
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let preset = self.preset.as_deref().map(str::parse).transpose()?;
        let file =
            match &self.config_file {
                Some(p) => Some(std::fs::read_to_string(p).map_err(|e| {
                    CliError::Data(format!("cannot read config {}: {e}", p.display()))
                })?),
                None => None,
            };
        RunConfig::resolve(preset, file.as_deref(), &self.flag_pairs())
    }
}

/// One JSON log record on standard error.
pub fn log(event: &str, fields: serde_json::Value) {
    let mut record = serde_json::json!({ "event": event });
    if let (Some(obj), serde_json::Value::Object(extra)) = (record.as_object_mut(), fields) {
        obj.extend(extra);
    }
    let _ = writeln!(std::io::stderr().lock(), "{record}");
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match commands::execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            log(
                "error",
                serde_json::json!({ "message": e.to_string(), "exit_code": e.exit_code() }),
            );
            eprintln!("mner: {e}");
            e.exit_code()
        }
    }
}

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::eval::MatchMode;
use crate::model::ModelConfig;
use crate::parallel::Execution;
use crate::training::TrainConfig;

use super::CliError;

/// Where an effective setting came from, lowest precedence first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Default,
    Preset,
    File,
    Flag,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::Preset => "preset",
            Source::File => "file",
            Source::Flag => "flag",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    PaperAlgo,
    PaperText,
}

impl FromStr for Preset {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "paper-algo" => Ok(Preset::PaperAlgo),
            "paper-text" => Ok(Preset::PaperText),
            _ => Err(CliError::Usage(format!(
                "unknown preset {s:?} (expected paper-algo or paper-text)"
            ))),
        }
    }
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::PaperAlgo => "paper-algo",
            Preset::PaperText => "paper-text",
        }
    }

    fn settings(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Preset::PaperAlgo => &[
                ("max_len", "90"),
                ("test_fraction", "0.1"),
                ("batch_size", "16"),
                ("max_epochs", "50"),
                ("lstm_units", "200"),
                ("validation_split", "0.2"),
            ],
            Preset::PaperText => &[
                ("max_len", "60"),
                ("test_fraction", "0.2"),
                ("batch_size", "16"),
                ("max_epochs", "50"),
                ("lstm_units", "200"),
                ("validation_split", "0.2"),
            ],
        }
    }
}

/// Every recognised key with its built-in default.
pub const KEYS: &[(&str, &str)] = &[
    ("max_len", "90"),
    ("embedding_dim", "auto"),
    ("lstm_units", "200"),
    ("spatial_dropout", "0.2"),
    ("recurrent_dropout", "0.2"),
    ("batch_size", "16"),
    ("max_epochs", "50"),
    ("validation_split", "0.2"),
    ("test_fraction", "0.1"),
    ("patience", "3"),
    ("min_delta", "0"),
    ("seed", "1"),
    ("folds", "5"),
    ("learning_rate", "0.001"),
    ("clip_norm", "5"),
    ("mask_padding", "false"),
    ("match_mode", "strict"),
    ("jobs", "1"),
    ("execution", "parallel"),
];

/// Effective settings of a run: model and training configuration plus the
/// source of every value.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    values: BTreeMap<&'static str, (String, Source)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            values: KEYS
                .iter()
                .map(|&(k, v)| (k, (v.to_string(), Source::Default)))
                .collect(),
        }
    }
}

impl RunConfig {
    /// Layers preset, file text and flag pairs over the defaults.
    pub fn resolve(
        preset: Option<Preset>,
        file: Option<&str>,
        flags: &[(&str, String)],
    ) -> Result<RunConfig, CliError> {
        let mut rc = RunConfig::default();
        if let Some(p) = preset {
            rc.preset = Some(p);
            for &(k, v) in p.settings() {
                rc.set(k, v, Source::Preset)?;
            }
        }
        if let Some(text) = file {
            for (k, v) in parse_config_file(text)? {
                rc.set(&k, &v, Source::File)?;
            }
        }
        for (k, v) in flags {
            rc.set(k, v, Source::Flag)?;
        }
        rc.model_config()?;
        rc.train_config()?;
        rc.match_mode()?;
        rc.jobs()?;
        Ok(rc)
    }

    pub fn set(&mut self, key: &str, value: &str, source: Source) -> Result<(), CliError> {
        let Some(&(k, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(CliError::Usage(format!(
                "unknown configuration key {key:?}"
            )));
        };
        self.values.insert(k, (value.trim().to_string(), source));
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        &self.values[key].0
    }

    pub fn source(&self, key: &str) -> Source {
        self.values[key].1
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.get(key);
        v.parse()
            .map_err(|_| CliError::Usage(format!("invalid value {v:?} for {key}")))
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            "none" | "off" => Ok(None),
            _ => self.parse(key).map(Some),
        }
    }

    pub fn model_config(&self) -> Result<ModelConfig, CliError> {
        let max_len: usize = self.parse("max_len")?;
        let embedding_dim = match self.get("embedding_dim") {
            "auto" => max_len,
            _ => self.parse("embedding_dim")?,
        };
        let cfg = ModelConfig {
            max_len,
            embedding_dim,
            lstm_units: self.parse("lstm_units")?,
            spatial_dropout: self.parse("spatial_dropout")?,
            recurrent_dropout: self.parse("recurrent_dropout")?,
            seed: self.parse("seed")?,
            ..ModelConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let execution = match self.get("execution") {
            "parallel" => Execution::Parallel,
            "sequential" => Execution::Sequential,
            v => {
                return Err(CliError::Usage(format!(
                    "invalid value {v:?} for execution"
                )))
            }
        };
        let cfg = TrainConfig {
            batch_size: self.parse("batch_size")?,
            max_epochs: self.parse("max_epochs")?,
            validation_split: self.parse("validation_split")?,
            test_fraction: self.parse("test_fraction")?,
            patience: self.optional("patience")?,
            min_delta: self.parse("min_delta")?,
            seed: self.parse("seed")?,
            folds: self.parse("folds")?,
            learning_rate: self.parse("learning_rate")?,
            clip_norm: self.optional("clip_norm")?,
            mask_padding: self.parse("mask_padding")?,
            execution,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn match_mode(&self) -> Result<MatchMode, CliError> {
        self.parse("match_mode")
    }

    pub fn jobs(&self) -> Result<usize, CliError> {
        let j: usize = self.parse("jobs")?;
        if j == 0 {
            return Err(CliError::Usage("jobs must be at least 1".into()));
        }
        Ok(j)
    }

    /// `config.<key>` and `config_source.<key>` lines for report headers.
    pub fn provenance(&self) -> String {
        let mut out = String::new();
        if let Some(p) = self.preset {
            writeln!(out, "preset\t{}", p.as_str()).unwrap();
        }
        for (k, (v, s)) in &self.values {
            writeln!(out, "config.{k}\t{v}").unwrap();
            writeln!(out, "config_source.{k}\t{}", s.as_str()).unwrap();
        }
        out
    }

    /// Flat `key = value` text that `parse_config_file` reads back.
    pub fn to_config_file(&self) -> String {
        self.values
            .iter()
            .map(|(k, (v, _))| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Reads flat `key = value` lines; `#` starts a comment line.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key = value",
                i + 1
            )));
        };
        let k = k.trim();
        if !KEYS.iter().any(|(key, _)| *key == k) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key {k:?}",
                i + 1
            )));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

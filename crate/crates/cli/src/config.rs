//! Run configuration: built-in defaults, overlaid by a TOML file, overlaid
//! by command-line flags.

use std::path::{Path, PathBuf};

use polarity_core::corpus::CorpusFormat;
use polarity_core::eventstat::DEFAULT_WINDOW_DAYS;
use polarity_core::reactor::{TrainConfig, DEFAULT_MIN_DF, DEFAULT_VALIDATION_FRACTION};
use polarity_core::valence::ValenceConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub tol: f64,
    pub balance_classes: bool,
    pub min_df: usize,
    /// Held-out share per class; 0 trains on everything.
    pub validation_fraction: f64,
    /// Class order for the model; defaults to the sorted distinct labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::<f64>::default();
        TrainSettings {
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            l2: t.l2,
            tol: t.tol,
            balance_classes: t.balance_classes,
            min_df: DEFAULT_MIN_DF,
            validation_fraction: DEFAULT_VALIDATION_FRACTION,
            classes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    /// Overrides detection from the corpus file extension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<CorpusFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stoplist: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Restrict every command to one group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub out: PathBuf,
    pub window_days: u32,
    pub seed: u64,
    /// Score the preprocessed token stream instead of the raw text.
    pub score_preprocessed: bool,
    pub valence: ValenceConfig<f64>,
    pub train: TrainSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            format: None,
            lexicon: None,
            stoplist: None,
            lemmas: None,
            events: None,
            model: None,
            group: None,
            out: PathBuf::from("out"),
            window_days: DEFAULT_WINDOW_DAYS,
            seed: TrainConfig::<f64>::default().seed,
            score_preprocessed: false,
            valence: ValenceConfig::default(),
            train: TrainSettings::default(),
        }
    }
}

impl RunConfig {
    /// Defaults, then the optional TOML file, then `overrides` (a partial
    /// table in the same shape, typically built from flags).
    pub fn layered(file: Option<&Path>, overrides: toml::Table) -> Result<Self, CliError> {
        let mut merged = toml::Table::try_from(RunConfig::default())
            .map_err(|e| CliError::Invalid(format!("default config: {e}")))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.to_owned(),
                source: e,
            })?;
            let table: toml::Table = text
                .parse()
                .map_err(|e| CliError::Invalid(format!("config file {}: {e}", path.display())))?;
            merge(&mut merged, table);
        }
        merge(&mut merged, overrides);
        let cfg: RunConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.valence.validate()?;
        self.train_config().validate()?;
        if self.window_days == 0 {
            return Err(CliError::Invalid("window_days must be at least 1".into()));
        }
        if self.train.min_df == 0 {
            return Err(CliError::Invalid("min_df must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.train.validation_fraction) {
            return Err(CliError::Invalid("validation_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig<f64> {
        TrainConfig {
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            l2: self.train.l2,
            seed: self.seed,
            tol: self.train.tol,
            balance_classes: self.train.balance_classes,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat, CliError> {
        let path = self.require(&self.corpus, "corpus")?;
        self.format
            .or_else(|| CorpusFormat::from_path(path))
            .ok_or_else(|| CliError::Invalid(format!("cannot tell the format of {}; pass --format", path.display())))
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
        path.as_deref()
            .ok_or_else(|| CliError::Invalid(format!("--{name} is required for this command")))
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

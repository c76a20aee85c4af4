//! Run configuration: which lexicons to load, which rules to enable,
//! the navigational threshold, and how votes are combined.
//!
//! Settings resolve lowest-to-highest as built-in defaults, then a config
//! file, then command-line flags; the `INTENT_LEXICONS` environment
//! variable only fills `lexicon_dir` when nothing else set it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::lexicon::{LexiconError, LexiconSet};
use crate::pipeline::{Labeler, LabelerError, VoteCombiner};
use crate::rules::{Registry, RuleParams};
use thiserror::Error;

pub const LEXICON_DIR_ENV: &str = "INTENT_LEXICONS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Majority,
    AgreementWeighted,
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "majority" => Ok(Aggregator::Majority),
            "agreement-weighted" | "agreement_weighted" | "weighted" => {
                Ok(Aggregator::AgreementWeighted)
            }
            other => Err(format!(
                "unknown aggregator {other:?} (expected `majority` or `agreement-weighted`)"
            )),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregator::Majority => write!(f, "majority"),
            Aggregator::AgreementWeighted => write!(f, "agreement-weighted"),
        }
    }
}

/// One labelling run's knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Directory of lexicon files; `None` uses the bundled set.
    pub lexicon_dir: Option<PathBuf>,
    pub nav_threshold: f64,
    pub aggregator: Aggregator,
    /// Drop the three URL-dependent rules (ablation mode).
    pub mute_url_lfs: bool,
    /// Per-rule enable/disable, keyed by rule id.
    pub lf_overrides: BTreeMap<String, bool>,
    pub include_votes: bool,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lexicon_dir: None,
            nav_threshold: RuleParams::default().nav_threshold,
            aggregator: Aggregator::Majority,
            mute_url_lfs: false,
            lf_overrides: BTreeMap::new(),
            include_votes: false,
            workers: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{file}:{line_no}: expected `key = value`, got {text:?}")]
    Malformed {
        file: String,
        line_no: usize,
        text: String,
    },
    #[error("{file}:{line_no}: unknown setting {key:?}")]
    UnknownKey {
        file: String,
        line_no: usize,
        key: String,
    },
    #[error("invalid value for {key}: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("nav_threshold must be in (0, 1], got {0}")]
    BadThreshold(f64),
    #[error("workers must be at least 1")]
    NoWorkers,
    #[error("no labelling function named {0:?}")]
    UnknownFunction(String),
    #[error("aggregator `agreement-weighted` needs weights (fit them or pass a weights file)")]
    MissingWeights,
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("reading config file {file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
}

impl RunConfig {
    /// Applies `key = value` lines from a config file on top of the
    /// current settings. `#` starts a comment; blank lines are ignored;
    /// rule toggles spell `lf.<id>.enabled = true|false`.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        let path = path.as_ref();
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            file: file.clone(),
            source,
        })?;
        self.apply_str(&text, &file)
    }

    pub fn apply_str(&mut self, text: &str, file: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
                file: file.to_string(),
                line_no,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            self.apply_setting(key, value).map_err(|e| match e {
                ConfigError::InvalidValue { .. } => e,
                ConfigError::UnknownKey { .. } => ConfigError::UnknownKey {
                    file: file.to_string(),
                    line_no,
                    key: key.to_string(),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    fn apply_setting(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = |reason: String| ConfigError::InvalidValue {
            key: key.to_string(),
            reason,
        };
        match key {
            "lexicon_dir" => self.lexicon_dir = Some(PathBuf::from(value)),
            "nav_threshold" => {
                self.nav_threshold = value
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("{e} ({value:?})")))?;
            }
            "aggregator" => self.aggregator = value.parse().map_err(invalid)?,
            "mute_url_lfs" => self.mute_url_lfs = parse_bool(value).map_err(invalid)?,
            "include_votes" => self.include_votes = parse_bool(value).map_err(invalid)?,
            "workers" => {
                self.workers = value
                    .parse::<usize>()
                    .map_err(|e| invalid(format!("{e} ({value:?})")))?;
            }
            other => {
                if let Some(id) = other
                    .strip_prefix("lf.")
                    .and_then(|rest| rest.strip_suffix(".enabled"))
                {
                    let enabled = parse_bool(value).map_err(invalid)?;
                    self.lf_overrides.insert(id.to_string(), enabled);
                } else {
                    // Position information is attached by the caller.
                    return Err(ConfigError::UnknownKey {
                        file: String::new(),
                        line_no: 0,
                        key: other.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.nav_threshold > 0.0 && self.nav_threshold <= 1.0) {
            return Err(ConfigError::BadThreshold(self.nav_threshold));
        }
        if self.workers == 0 {
            return Err(ConfigError::NoWorkers);
        }
        let known: Vec<&str> = Registry::default_set().ids().collect();
        for id in self.lf_overrides.keys() {
            if !known.contains(&id.as_str()) {
                return Err(ConfigError::UnknownFunction(id.clone()));
            }
        }
        Ok(())
    }

    /// `lexicon_dir`, falling back to `INTENT_LEXICONS` when unset.
    pub fn lexicon_dir_or_env(&self) -> Option<PathBuf> {
        self.lexicon_dir
            .clone()
            .or_else(|| std::env::var_os(LEXICON_DIR_ENV).map(PathBuf::from))
    }

    pub fn load_lexicons(&self) -> Result<LexiconSet, LexiconError> {
        match self.lexicon_dir_or_env() {
            Some(dir) => LexiconSet::load(dir),
            None => Ok(LexiconSet::bundled()),
        }
    }

    /// The rule registry this run asks for: the default set, minus URL
    /// rules when muted, minus anything overridden off.
    pub fn build_registry(&self) -> Result<Registry, ConfigError> {
        self.validate()?;
        let mut registry = Registry::default_set();
        if self.mute_url_lfs {
            registry.mute_url_functions();
        }
        for (id, enabled) in &self.lf_overrides {
            if !enabled {
                // Already-muted rules are simply absent; that's fine.
                let _ = registry.disable(id);
            }
        }
        Ok(registry)
    }

    /// Assembles a ready labeler. Agreement-weighted runs must supply
    /// weights (fitted or loaded); majority runs ignore the argument.
    pub fn build_labeler(
        &self,
        weights: Option<BTreeMap<String, f64>>,
    ) -> Result<Labeler, ConfigError> {
        let registry = self.build_registry()?;
        let lexicons = self.load_lexicons()?;
        let combiner = match self.aggregator {
            Aggregator::Majority => VoteCombiner::Majority,
            Aggregator::AgreementWeighted => {
                VoteCombiner::Weighted(weights.ok_or(ConfigError::MissingWeights)?)
            }
        };
        let params = RuleParams {
            nav_threshold: self.nav_threshold,
        };
        Labeler::new(registry, lexicons, params, combiner, self.include_votes).map_err(
            |e| match e {
                LabelerError::MissingWeight(id) => ConfigError::InvalidValue {
                    key: "weights".to_string(),
                    reason: format!("no weight for labelling function {id:?}"),
                },
            },
        )
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

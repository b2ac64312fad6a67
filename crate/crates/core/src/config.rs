//! Flat `key = value` configuration files.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored. Keys
//! use the long flag name with `_` for `-` (`per_topic = 100`). A value set on
//! the command line or through the environment wins over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

/// Every key a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "input",
    "per_topic",
    "seed",
    "rejects",
    "label_model",
    "label_concurrency",
    "benchmark",
    "roster",
    "journal",
    "parallelism",
    "provider",
    "sim_seed",
    "temperature",
    "max_tokens",
    "reasoning_effort",
    "max_attempts",
    "attempt_timeout_secs",
    "fits",
    "grid_nodes",
    "grid_half_span",
    "tol",
    "max_cycles",
    "errors_as_missing",
    "extreme_b",
    "near_zero_a",
    "verdicts",
    "bundle",
    "address",
    "assets",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Syntax { path: PathBuf, line: usize, reason: String },
    #[error("config key {key}: cannot parse {value:?}: {reason}")]
    Value { key: String, value: String, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|(line, reason)| ConfigError::Syntax { path: path.to_path_buf(), line, reason })
    }

    /// Errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or((n + 1, format!("expected key = value, got {line:?}")))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err((n + 1, format!("unknown key {key:?}")));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err((n + 1, format!("key {key:?} set twice")));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|e: T::Err| ConfigError::Value {
                    key: key.into(),
                    value: v.into(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    /// Flag or environment value if given, else the file, else `default`.
    pub fn resolve<T>(&self, given: Option<T>, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match given {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Like [`ConfigFile::resolve`] for settings without a default.
    pub fn resolve_opt<T>(&self, given: Option<T>, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match given {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

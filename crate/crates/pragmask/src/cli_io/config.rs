//! Configuration sources and precedence.
//!
//! Flags override the optional flat `key=value` config file, which overrides
//! the `PRAGMASK_SEED` environment variable (seed only), which overrides
//! built-in defaults. Unknown config keys are rejected.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

/// Every key the config file may contain: the long CLI flag names.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "workers",
    "mask-rate",
    "action-probs",
    "mode",
    "max-len",
    "topic",
    "min-words",
    "min-count",
    "copy-thresh",
    "mutual-thresh",
    "unrelated-thresh",
    "measure",
    "vocab",
    "tag",
    "count",
    "ratios",
    "kind",
    "lang",
    "unicode-hashtags",
    "seeds",
    "max-per-original",
];

/// Environment variable consulted as the lowest-priority seed source.
pub const SEED_ENV_VAR: &str = "PRAGMASK_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {0}: {1}")]
    Read(String, std::io::Error),
    #[error("config file line {0}: expected `key=value`, got {1:?}")]
    Syntax(usize, String),
    #[error("config file: unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {value:?}")]
    Value { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// Parsed flat `key=value` file. Lines starting with `#` and blank lines
/// are ignored.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax(lineno + 1, line.to_string()));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `flag` beats the file value beats `default`.
    pub fn resolve<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, ConfigError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw.parse().map_err(|_| ConfigError::Value {
                key: key.to_string(),
                value: raw.to_string(),
            }),
            None => Ok(default),
        }
    }

    /// Like [`resolve`](Self::resolve) but with no default.
    pub fn resolve_opt<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, ConfigError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::Value { key: key.to_string(), value: raw.to_string() }),
            None => Ok(None),
        }
    }

    /// Seed resolution consults the environment as the last source before
    /// the default of 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, ConfigError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.get("seed") {
            return raw
                .parse()
                .map_err(|_| ConfigError::Value { key: "seed".into(), value: raw.into() });
        }
        match std::env::var(SEED_ENV_VAR) {
            Ok(raw) => raw
                .parse()
                .map_err(|_| ConfigError::Value { key: SEED_ENV_VAR.into(), value: raw }),
            Err(_) => Ok(0),
        }
    }
}

/// Parse `a,b,c` into a ratio triple.
pub fn parse_triple(raw: &str, key: &str) -> Result<(f64, f64, f64), ConfigError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(ConfigError::Value { key: key.into(), value: raw.into() });
    }
    let mut vals = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .parse()
            .map_err(|_| ConfigError::Value { key: key.into(), value: raw.into() })?;
    }
    Ok((vals[0], vals[1], vals[2]))
}

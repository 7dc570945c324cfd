//! Flat `key = value` configuration files and option resolution.
//!
//! A config file supplies defaults for CLI flags, one `key = value` pair per
//! line, with `#` comments and blank lines ignored. Resolution precedence is
//! fixed: explicit flags override config-file keys, which override the
//! `SUBJUMP_SEED` environment variable (for the seed only), which overrides
//! built-in defaults.
//!
//! Keys are validated against the known set at parse time so a typo fails
//! loudly with the offending key and line, instead of silently falling back
//! to a default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Environment variable consulted for the default master seed.
pub const SEED_ENV_VAR: &str = "SUBJUMP_SEED";

/// Keys a config file may set. Each mirrors the CLI flag of the same name.
pub const KNOWN_KEYS: &[&str] = &[
    "model",
    "stat",
    "theorem",
    "k",
    "t",
    "n",
    "seed",
    "lambda",
    "x",
    "rel-tol",
    "compensate",
    "serial",
    "value-cap",
    "hard-cap",
    "max-failure-fraction",
    "regime",
    "direction",
    "law",
    "alpha",
    "out",
];

/// A parsed config file: a flat string-to-string map plus typed accessors.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    /// A config file with no entries; every lookup falls through.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Read and parse `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(format!("cannot read config file '{}': {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Parse config text. Rejects unknown keys, duplicate keys, and lines
    /// that are not `key = value`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value, got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            if value.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: key '{key}' has an empty value",
                    lineno + 1
                )));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Ok(ConfigFile { entries })
    }

    /// Raw lookup.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.typed(key, "a number", str::parse::<f64>)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.typed(key, "a nonnegative integer", str::parse::<u64>)
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.typed(key, "a nonnegative integer", str::parse::<usize>)
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.typed(key, "true or false", |v| match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(()),
        })
    }

    /// Comma-separated list of numbers.
    pub fn get_grid(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_grid(key, v).map(Some),
        }
    }

    fn typed<T, E>(
        &self,
        key: &str,
        expected: &str,
        parse: impl Fn(&str) -> std::result::Result<T, E>,
    ) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse(v).map(Some).map_err(|_| {
                Error::Config(format!("key '{key}': '{v}' is not {expected}"))
            }),
        }
    }
}

/// Parse a comma-separated list of numbers, as used by grid-valued flags
/// and config keys (`--t 0.001,1,1000`).
pub fn parse_grid(name: &str, text: &str) -> Result<Vec<f64>> {
    let mut grid = Vec::new();
    for tok in text.split(',') {
        let tok = tok.trim();
        let v: f64 = tok.parse().map_err(|_| {
            Error::Config(format!("{name}: '{tok}' is not a number"))
        })?;
        if !v.is_finite() {
            return Err(Error::Config(format!("{name}: values must be finite, got {v}")));
        }
        grid.push(v);
    }
    Ok(grid)
}

/// Resolve the master seed: flag, then config key, then the
/// [`SEED_ENV_VAR`] environment value, then 0.
pub fn resolve_seed(
    flag: Option<u64>,
    file: Option<u64>,
    env: Option<&str>,
) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{SEED_ENV_VAR}: '{v}' is not a nonnegative integer seed"
            ))
        }),
        None => Ok(0),
    }
}

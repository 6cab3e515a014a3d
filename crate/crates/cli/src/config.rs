//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names without dashes (`a-range`, `max-nodes`, ...); underscores are
//! accepted in place of dashes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub const KEYS: &[&str] = &[
    "a",
    "ej",
    "a-range",
    "ej-range",
    "mu",
    "tol",
    "max-nodes",
    "out",
    "jobs",
    "k",
    "points",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError(format!("line {}: unknown key '{key}'", n + 1)));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(ConfigError(format!(
                    "line {}: duplicate key '{key}'",
                    n + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| ConfigError(format!("config key '{key}': cannot parse '{v}'")))
            })
            .transpose()
    }

    /// Command-line value if given, else the config value, else `default`.
    pub fn resolve<T: FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, ConfigError> {
        match cli {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn resolve_required<T: FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
    ) -> Result<T, ConfigError> {
        match cli {
            Some(v) => Ok(v),
            None => self
                .get(key)?
                .ok_or_else(|| ConfigError(format!("missing required value --{key}"))),
        }
    }
}

/// A frequency ratio given as a decimal or as `p/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub f64);

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let value = match s.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad numerator in '{s}'"))?;
                let q: f64 = q
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad denominator in '{s}'"))?;
                p / q
            }
            None => s
                .trim()
                .parse()
                .map_err(|_| format!("'{s}' is not a ratio"))?,
        };
        if value.is_finite() && value > 0.0 {
            Ok(Ratio(value))
        } else {
            Err(format!("ratio '{s}' must be positive"))
        }
    }
}

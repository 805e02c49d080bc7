//! Parameter resolution: command-line flag, then config file, then default.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

/// Environment variable consulted for the master seed when neither the
/// flag nor the config file sets one.
pub const SEED_ENV: &str = "POSTSEL_SEED";

/// A line-based `key = value` file. Blank lines and `#` comments are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = k.trim().replace('_', "-");
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config key {key:?} given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Resolves parameters for one command and records the resolved values for
/// the report's config echo.
#[derive(Debug, Default)]
pub struct Resolver {
    file: ConfigFile,
    used: BTreeSet<String>,
    echo: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Self { file, ..Self::default() })
    }

    pub fn with_file(file: ConfigFile) -> Self {
        Self { file, ..Self::default() }
    }

    fn from_file<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config value for {key}: {e}"))),
        }
    }

    /// Flag, else file, else `default`; echoed into the report config.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let v = match flag {
            Some(v) => v,
            None => self.from_file(key)?.unwrap_or(default),
        };
        self.echo(key, &v);
        Ok(v)
    }

    /// Like [`value`](Self::value) but without a default.
    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let v = match flag {
            Some(v) => v,
            None => self
                .from_file(key)?
                .ok_or_else(|| CliError::Usage(format!("missing --{key}")))?,
        };
        self.echo(key, &v);
        Ok(v)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        if let Some(v) = &v {
            self.echo(key, v);
        }
        Ok(v)
    }

    /// Flag, else file, else `POSTSEL_SEED`, else 0.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        self.used.insert("seed".to_string());
        let v = match flag {
            Some(v) => v,
            None => match self.from_file("seed")? {
                Some(v) => v,
                None => match std::env::var(SEED_ENV) {
                    Ok(s) => s
                        .trim()
                        .parse()
                        .map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}")))?,
                    Err(_) => 0,
                },
            },
        };
        self.echo("seed", &v);
        Ok(v)
    }

    /// Settings that do not affect results and are not echoed.
    pub fn setting<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.from_file(key),
        }
    }

    pub fn echo<T: Serialize>(&mut self, key: &str, v: &T) {
        let value = serde_json::to_value(v).unwrap_or(Value::Null);
        self.echo.insert(key.to_string(), value);
    }

    /// Fails on config keys no parameter asked for.
    pub fn finish(self) -> Result<BTreeMap<String, Value>> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains(*k)) {
            return Err(CliError::Usage(format!("unknown config key {k:?}")));
        }
        Ok(self.echo)
    }
}

/// Output locations shared by all commands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub threads: usize,
}

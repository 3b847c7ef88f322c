//! `key=value` config files and flag/config/default resolution.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

fn normalise(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = normalise(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: `{key}` set twice", i + 1)));
            }
        }
        Ok(Self { values, used: RefCell::default() })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    fn parse_value<T: FromStr>(key: &str, v: &str) -> CliResult<T>
    where
        T::Err: Display,
    {
        v.parse()
            .map_err(|e| CliError::Usage(format!("config `{key}`: {e}")))
    }

    /// Flag if given, else the config value, else `None`.
    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        let cfg = self.raw(key);
        match (flag, cfg) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(v)) => Self::parse_value(key, v).map(Some),
            (None, None) => Ok(None),
        }
    }

    pub fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<T>
    where
        T::Err: Display,
    {
        self.opt(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("--{key} is required")))
    }

    /// Repeatable flag; the config form is comma-separated.
    pub fn list<T: FromStr>(&self, flag: Vec<T>, key: &str) -> CliResult<Vec<T>>
    where
        T::Err: Display,
    {
        let cfg = self.raw(key);
        if !flag.is_empty() {
            return Ok(flag);
        }
        match cfg {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| Self::parse_value(key, s))
                .collect(),
            None => Ok(Vec::new()),
        }
    }

    pub fn switch(&self, flag: bool, key: &str) -> CliResult<bool> {
        Ok(flag || self.opt::<bool>(None, key)?.unwrap_or(false))
    }

    /// Rejects config keys no resolver asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        match self.values.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(CliError::Usage(format!("unknown config key `{k}` for this command"))),
            None => Ok(()),
        }
    }
}

/// Integer list: `16`, `12,14,20`, `12..=26` or `12..=26/2`, mixable by commas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item.split_once("..=") {
                None => out.push(num(item)?),
                Some((a, rest)) => {
                    let (b, step) = match rest.split_once('/') {
                        Some((b, st)) => (num(b)?, num(st)?),
                        None => (num(rest)?, 1),
                    };
                    if step == 0 {
                        return Err(format!("`{item}`: step must be positive"));
                    }
                    out.extend((num(a)?..=b).step_by(step));
                }
            }
        }
        if out.is_empty() {
            return Err(format!("`{s}` is an empty range"));
        }
        Ok(IntList(out))
    }
}

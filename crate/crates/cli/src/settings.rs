//! Flat `key = value` configuration with precedence flag > file > default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::exit::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    effective: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
        let file = parse_config(&text).map_err(|e| CliError::Argument(format!("{}: {e}", path.display())))?;
        Ok(Settings {
            file,
            effective: BTreeMap::new(),
        })
    }

    /// Resolves `key`, parses it, and records the raw text as effective.
    pub fn get<T>(&mut self, key: &str, flag: Option<&str>, default: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = flag
            .map(str::to_string)
            .or_else(|| self.file.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        let value = raw
            .parse::<T>()
            .map_err(|e| CliError::Argument(format!("bad value {raw:?} for {key}: {e}")))?;
        self.effective.insert(key.to_string(), raw);
        Ok(value)
    }

    /// As [`Settings::get`] for settings without a default.
    pub fn get_opt(&mut self, key: &str, flag: Option<&str>) -> Option<String> {
        let raw = flag.map(str::to_string).or_else(|| self.file.get(key).cloned())?;
        self.effective.insert(key.to_string(), raw.clone());
        Some(raw)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.effective.get(key).map(String::as_str)
    }

    /// Config-file keys that no command consumed.
    pub fn unused_keys(&self) -> Vec<&str> {
        self.file
            .keys()
            .filter(|k| !self.effective.contains_key(*k))
            .map(String::as_str)
            .collect()
    }

    pub fn render(&self) -> String {
        self.effective
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

//! Flat `key = value` configuration files.
//!
//! One key per line; `#` starts a comment; blank lines are ignored. Keys are
//! the long command-line flag names without the leading dashes.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value, got `{raw}`", n + 1)))?;
        let key = key.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", n + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("config line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(map)
}

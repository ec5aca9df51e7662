//! Flat key=value config files and flag/file/default resolution. Keys mirror
//! the long flag names (L, mode, g, c, dt, t-max, L-list, ...); precedence is
//! always explicit flag, then config file, then built-in default.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    /// Parses `key = value` lines. Blank lines and lines starting with # are
    /// skipped; anything else without a = is an error.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected key=value, got {:?}",
                    path.display(),
                    lineno + 1,
                    line
                );
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }
}

/// Flag value if given, else config value, else none.
pub fn pick_str<'a>(flag: Option<&'a str>, cfg: &'a FileConfig, key: &str) -> Option<&'a str> {
    flag.or_else(|| cfg.get(key))
}

pub fn pick_string(flag: Option<&str>, cfg: &FileConfig, key: &str, default: &str) -> String {
    pick_str(flag, cfg, key).unwrap_or(default).to_string()
}

pub fn pick_f64(flag: Option<f64>, cfg: &FileConfig, key: &str, default: f64) -> Result<f64> {
    match flag {
        Some(v) => Ok(v),
        None => match cfg.get(key) {
            Some(raw) => raw
                .parse::<f64>()
                .with_context(|| format!("config key {key}: not a number: {raw:?}")),
            None => Ok(default),
        },
    }
}

pub fn pick_usize(
    flag: Option<usize>,
    cfg: &FileConfig,
    key: &str,
    default: usize,
) -> Result<usize> {
    match flag {
        Some(v) => Ok(v),
        None => match cfg.get(key) {
            Some(raw) => raw
                .parse::<usize>()
                .with_context(|| format!("config key {key}: not an integer: {raw:?}")),
            None => Ok(default),
        },
    }
}

pub fn pick_opt_usize(flag: Option<usize>, cfg: &FileConfig, key: &str) -> Result<Option<usize>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => match cfg.get(key) {
            Some(raw) => raw
                .parse::<usize>()
                .map(Some)
                .with_context(|| format!("config key {key}: not an integer: {raw:?}")),
            None => Ok(None),
        },
    }
}

/// A true flag wins; otherwise the config key may switch it on.
pub fn pick_bool(flag: bool, cfg: &FileConfig, key: &str) -> Result<bool> {
    if flag {
        return Ok(true);
    }
    match cfg.get(key) {
        Some(raw) => match raw {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => bail!("config key {key}: not a boolean: {other:?}"),
        },
        None => Ok(false),
    }
}

/// Comma-separated list of numbers, used for L-list and c-list.
pub fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.parse::<T>() {
            Ok(v) => out.push(v),
            Err(e) => bail!("{what}: bad entry {part:?}: {e}"),
        }
    }
    if out.is_empty() {
        bail!("{what}: empty list");
    }
    Ok(out)
}

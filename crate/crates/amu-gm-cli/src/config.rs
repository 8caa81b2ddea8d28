//! `key = value` defaults. Command-line flags win over the file; the precision
//! environment variable wins over the file but not over `--precision`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::UsageError;

pub const PRECISION_ENV: &str = "AMU_GM_PRECISION";
pub const SUPPORTED_PRECISIONS: &[&str] = &["double"];

const KNOWN_KEYS: &[&str] = &[
    "mu", "nu", "m", "K", "k1", "k", "x0", "point", "s", "family", "cycle", "ladder", "eps0", "radius", "critical", "format", "seed", "precision", "suite", "scale",
];

#[derive(Clone, Debug, Default)]
pub struct Defaults {
    values: BTreeMap<String, String>,
}

impl Defaults {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| UsageError(format!("config line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(UsageError(format!("config line {}: unknown key `{k}`", n + 1)));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Defaults { values })
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| UsageError(format!("config `{key} = {v}`: {e}"))),
        }
    }

    /// The flag if given, else the config value, else `fallback`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, fallback: Option<T>) -> Result<T, UsageError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(v) = self.get(key)? {
            return Ok(v);
        }
        fallback.ok_or_else(|| UsageError(format!("missing --{key} (no flag and no config default)")))
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

pub fn resolve_precision(flag: Option<String>, env: Option<String>, defaults: &Defaults) -> Result<String, UsageError> {
    let p = flag.or(env).or_else(|| defaults.raw("precision").map(str::to_string)).unwrap_or_else(|| "double".into());
    if SUPPORTED_PRECISIONS.contains(&p.as_str()) {
        Ok(p)
    } else {
        Err(UsageError(format!("precision `{p}` is not supported (supported: {})", SUPPORTED_PRECISIONS.join(", "))))
    }
}

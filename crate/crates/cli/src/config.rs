//! `key = value` config files. Keys are long flag names without the
//! leading dashes; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str, known: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", n + 1))?;
            let key = key.trim().replace('_', "-");
            if !known.contains(&key.as_str()) {
                bail!("config line {}: unknown key '{key}' (known: {})", n + 1, known.join(", "));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&Path>, known: &[&str]) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text, known)
            }
        }
    }

    /// Flag value, else config value, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key '{key}': {e}")))
            .transpose()
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let cfg = Config::parse("seed = 7\n# note\nmodulus=101 # trailing\n", &["seed", "modulus"]).unwrap();
        assert_eq!(cfg.or(Some(3u64), "seed", 0).unwrap(), 3);
        assert_eq!(cfg.or(None::<u64>, "seed", 0).unwrap(), 7);
        assert_eq!(cfg.or(None::<u64>, "modulus", 0).unwrap(), 101);
        assert_eq!(Config::default().or(None::<u64>, "seed", 42).unwrap(), 42);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(Config::parse("bogus = 1", &["seed"]).is_err());
        assert!(Config::parse("seed", &["seed"]).is_err());
        let cfg = Config::parse("seed = x", &["seed"]).unwrap();
        assert!(cfg.or(None::<u64>, "seed", 0).is_err());
    }
}

//! Key/value parameters merged from a config file and command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

/// Resolved parameters of one subcommand. Flags override config-file values.
#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    env_threads: Option<String>,
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected 'key = value', got '{}'", i + 1, raw.trim()))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

impl Params {
    /// Collect the config file named by `--config`, then the flags given on the command line.
    pub fn collect(spec: &Command, matches: &ArgMatches, threads_env: &str) -> Result<Params> {
        let known: Vec<String> = spec
            .get_arguments()
            .filter(|a| a.get_long().is_some())
            .map(|a| a.get_id().to_string())
            .collect();
        let mut values = BTreeMap::new();
        if let Some(path) = matches.get_one::<String>("config") {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {path}"))?;
            for (k, v) in parse_config_text(&text).with_context(|| format!("in config file {path}"))? {
                if k == "config" || !known.contains(&k) {
                    bail!("unknown key '{k}' in config file {path} for '{}'", spec.get_name());
                }
                values.insert(k, v);
            }
        }
        for id in &known {
            if matches.value_source(id) == Some(ValueSource::CommandLine) {
                if let Some(v) = matches.get_one::<String>(id) {
                    values.insert(id.clone(), v.clone());
                }
            }
        }
        let p = Params { values, env_threads: std::env::var(threads_env).ok() };
        p.threads()?;
        Ok(p)
    }

    #[cfg(test)]
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Params {
        Params {
            values: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            env_threads: None,
        }
    }

    pub fn str(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("invalid value for key '{key}': '{v}': {e}")),
        }
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| anyhow!("missing required key '{key}'"))
    }

    /// Comma-separated numbers.
    pub fn list(&self, key: &str, text: &str) -> Result<Vec<f64>> {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("invalid value for key '{key}': '{}': {e}", s.trim()))
            })
            .collect()
    }

    /// Thread count from `--threads`, the config file or the environment.
    pub fn threads(&self) -> Result<Option<usize>> {
        let raw = match (self.values.get("threads"), &self.env_threads) {
            (Some(v), _) => v.clone(),
            (None, Some(v)) if !v.trim().is_empty() => v.clone(),
            _ => return Ok(None),
        };
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("invalid value for key 'threads': '{raw}' (a positive integer)"),
        }
    }

    pub fn thread_pool(&self) -> Result<Option<rayon::ThreadPool>> {
        self.threads()?
            .map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().context("cannot start thread pool"))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let m = parse_config_text("# comment\nreps = 1000\n\nH=0.25 # trailing\nr_min = 1e-3\n").unwrap();
        assert_eq!(m["reps"], "1000");
        assert_eq!(m["H"], "0.25");
        assert_eq!(m["r-min"], "1e-3");
        assert!(parse_config_text("reps 1000").is_err());
    }

    #[test]
    fn typed_access() {
        let p = Params::from_pairs(&[("reps", "12"), ("H", "x")]);
        assert_eq!(p.require::<usize>("reps").unwrap(), 12);
        let e = p.get::<f64>("H").unwrap_err().to_string();
        assert!(e.contains("'H'"), "{e}");
        assert!(p.require::<f64>("K").unwrap_err().to_string().contains("'K'"));
        assert_eq!(p.get_or("seed", 7u64).unwrap(), 7);
    }

    #[test]
    fn threads_precedence() {
        let mut p = Params::from_pairs(&[]);
        p.env_threads = Some("3".into());
        assert_eq!(p.threads().unwrap(), Some(3));
        p.values.insert("threads".into(), "2".into());
        assert_eq!(p.threads().unwrap(), Some(2));
        p.values.insert("threads".into(), "0".into());
        assert!(p.threads().is_err());
    }
}

//! Run configuration: defaults, then a key=value file, then flags.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{CliError, CliResult};

/// One setting a subcommand understands.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
    /// Boolean switch; takes no value on the command line.
    pub switch: bool,
}

impl Key {
    pub const fn value(name: &'static str, default: Option<&'static str>, help: &'static str) -> Self {
        Key { name, default, help, switch: false }
    }

    pub const fn switch(name: &'static str, help: &'static str) -> Self {
        Key { name, default: Some("false"), help, switch: true }
    }
}

/// A parsed config file entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// key=value lines; blank lines and lines starting with '#' are skipped.
pub fn parse_config(text: &str) -> CliResult<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return Err(CliError::Parse(format!("config line {line}: expected key=value, got {s:?}")));
        };
        let key = k.trim();
        if key.is_empty() {
            return Err(CliError::Parse(format!("config line {line}: empty key")));
        }
        out.push(Entry { line, key: key.to_string(), value: v.trim().to_string() });
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> CliResult<Vec<Entry>> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Parse(format!("cannot read config {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Parse(format!("config {} is not UTF-8", path.display())))?;
    parse_config(&text)
}

/// The fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: String,
    values: BTreeMap<String, String>,
    explicit: BTreeSet<String>,
}

impl RunConfig {
    /// Applies defaults, then file entries, then flags. File keys must be
    /// ones the subcommand knows.
    pub fn resolve(command: &str, keys: &[Key], file: &[Entry], flags: &[(String, String)]) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        let mut explicit = BTreeSet::new();
        for k in keys {
            if let Some(d) = k.default {
                values.insert(k.name.to_string(), d.to_string());
            }
        }
        for e in file {
            if !keys.iter().any(|k| k.name == e.key) {
                return Err(CliError::Parse(format!(
                    "config line {}: unknown key {:?} for {command}",
                    e.line, e.key
                )));
            }
            values.insert(e.key.clone(), e.value.clone());
            explicit.insert(e.key.clone());
        }
        for (k, v) in flags {
            values.insert(k.clone(), v.clone());
            explicit.insert(k.clone());
        }
        Ok(RunConfig { command: command.to_string(), values, explicit })
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key).ok_or_else(|| CliError::Usage(format!("missing required setting --{key}")))
    }

    pub fn f64(&self, key: &str) -> CliResult<f64> {
        parse_f64(key, self.require(key)?)
    }

    pub fn usize(&self, key: &str) -> CliResult<usize> {
        let s = self.require(key)?;
        s.parse().map_err(|_| CliError::Parse(format!("--{key}: expected a non-negative integer, got {s:?}")))
    }

    pub fn u64(&self, key: &str) -> CliResult<u64> {
        let s = self.require(key)?;
        s.parse().map_err(|_| CliError::Parse(format!("--{key}: expected a non-negative integer, got {s:?}")))
    }

    pub fn switch(&self, key: &str) -> CliResult<bool> {
        match self.get(key).unwrap_or("false") {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            s => Err(CliError::Parse(format!("--{key}: expected true or false, got {s:?}"))),
        }
    }

    pub fn complex(&self, key: &str) -> CliResult<Complex64> {
        parse_complex(self.require(key)?).map_err(|m| CliError::Parse(format!("--{key}: {m}")))
    }

    pub fn f64_list(&self, key: &str) -> CliResult<Vec<f64>> {
        parse_list(self.require(key)?).map_err(|m| CliError::Parse(format!("--{key}: {m}")))
    }

    pub fn i64_list(&self, key: &str) -> CliResult<Vec<i64>> {
        self.require(key)?
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse().map_err(|_| CliError::Parse(format!("--{key}: bad integer {t:?}")))
            })
            .collect()
    }
}

fn parse_f64(key: &str, s: &str) -> CliResult<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::Parse(format!("--{key}: expected a number, got {s:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Parse(format!("--{key}: value must be finite")));
    }
    Ok(v)
}

/// `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    let bad = || format!("bad complex literal {s:?}");
    let num = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad),
        }
    };
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)?, 0.0));
    };
    // the split is the last sign that is not part of an exponent
    let b = body.as_bytes();
    let split = (1..b.len()).rev().find(|&k| (b[k] == b'+' || b[k] == b'-') && !matches!(b[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad)?;
            Ok(Complex64::new(re, num(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

/// Comma-separated numbers, or `lo:hi:n` for n evenly spaced values.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let t = s.trim();
    let num = |x: &str| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(format!("bad number {x:?}"));
    let parts: Vec<&str> = t.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad count in {t:?}"))?;
        return match n {
            0 => Err("range needs at least one point".into()),
            1 => Ok(vec![lo]),
            _ => Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()),
        };
    }
    if parts.len() != 1 || t.is_empty() {
        return Err(format!("expected a list or lo:hi:n, got {t:?}"));
    }
    t.split(',').map(num).collect()
}

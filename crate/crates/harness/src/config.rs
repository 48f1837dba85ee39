//! Flat `key=value` run configurations.
//!
//! A config file supplies defaults for long flags: `maps-per-size=100` acts
//! like `--maps-per-size 100` placed before the flags typed on the command
//! line, which therefore win. `true` and `false` switch boolean flags.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

/// The resolved parameters of one invocation; writing it next to the
/// outputs makes a run repeatable with `--config`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub command: String,
    pub entries: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parse a flat file. Blank lines and lines starting with `#` are
    /// skipped; a `command` key names the subcommand.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| ConfigError { line: i + 1, msg: msg.into() };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(err("keys are flag names made of letters, digits, '-' and '_'"));
            }
            let k = k.replace('_', "-");
            if k == "command" {
                cfg.command = v.to_string();
            } else if cfg.entries.insert(k.clone(), v.to_string()).is_some() {
                return Err(err(&format!("duplicate key {k}")));
            }
        }
        Ok(cfg)
    }

    /// Entries as command-line tokens.
    pub fn to_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            match v.as_str() {
                "true" => out.push(format!("--{k}")),
                "false" => {}
                _ => out.extend([format!("--{k}"), v.clone()]),
            }
        }
        out
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.command.is_empty() {
            writeln!(f, "command={}", self.command)?;
        }
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

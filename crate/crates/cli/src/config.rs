//! Optional `key = value` defaults file.
//!
//! Entries are spliced into argv right after the subcommand name, so any
//! flag given on the command line overrides them.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, CommandFactory};

use crate::cli::Cli;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("config line {line}: `{key}` is not a flag of any subcommand")]
    UnknownKey { line: usize, key: String },
}

/// Parse `key = value` lines. Keys may use `_` or `-`.
pub fn parse(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        out.push((i + 1, key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Return argv with the config file's entries inserted for the chosen
/// subcommand. Without `--config`, argv is returned unchanged.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path_str = Path::new(&path).display().to_string();
    let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
        path: path_str,
        source,
    })?;
    let entries = parse(&text)?;

    let cmd = Cli::command();
    let known: BTreeSet<String> = cmd
        .get_subcommands()
        .flat_map(|s| s.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    for (line, key, _) in &entries {
        if !known.contains(key) || key == "config" {
            return Err(ConfigError::UnknownKey {
                line: *line,
                key: key.clone(),
            });
        }
    }
    let names: BTreeSet<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();
    let Some(pos) = argv.iter().position(|a| names.contains(a.to_string_lossy().as_ref())) else {
        return Ok(argv);
    };
    let sub = cmd
        .find_subcommand(argv[pos].to_string_lossy().as_ref())
        .expect("matched above");

    let mut injected: Vec<OsString> = Vec::new();
    for (_, key, value) in &entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key)) else {
            continue;
        };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            if matches!(value.to_ascii_lowercase().as_str(), "true" | "yes" | "1") {
                injected.push(format!("--{key}").into());
            }
        } else {
            injected.push(format!("--{key}={value}").into());
        }
    }
    let mut out = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

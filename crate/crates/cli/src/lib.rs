//! The `cine` command-line driver.
//!
//! Flags may also come from a `key=value` file given with `--config`; each key
//! is a long flag name of the chosen subcommand. Flags on the command line
//! override the file. Exit codes: 0 success, 2 usage, 3 data, 4 divergence.

mod args;
mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::Context;
use clap::Parser;

pub use args::{Cli, Command};
use cine_core::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_DIVERGENCE: u8 = 4;

const SUBCOMMANDS: [&str; 5] = ["convert", "split", "embed", "eval", "bench"];

/// Parses a `key=value` file into flag tokens. Booleans `true`/`false` become
/// a bare flag or nothing.
pub fn config_tokens(path: &Path) -> anyhow::Result<Vec<OsString>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected key=value", path.display(), no + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
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

/// Splices config-file flags in right after the subcommand so that later
/// command-line occurrences win.
pub fn expand_config(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let tokens = config_tokens(Path::new(&path))?;
    let pos = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .ok_or_else(|| Error::Config("--config needs a subcommand".into()))?;
    let mut out = argv[..=pos].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => EXIT_USAGE,
        Some(Error::Divergence { .. }) => EXIT_DIVERGENCE,
        _ => EXIT_DATA,
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run(argv: Vec<OsString>) -> u8 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

//! Command-line harness: parses a run, executes it in a hash-keyed
//! directory and writes a report bundle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;
pub mod sweep;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

use crate::commands::Output;
use crate::config::{Command, ConfigError, RunConfig};
use crate::report::{complete, Check, ReportBundle, RunMetadata, SCHEMA_VERSION};

pub const BUNDLE_FILE: &str = "bundle.json";

/// Length of the hash prefix in run directory names.
const HASH_PREFIX: usize = 12;

pub fn run_dir(config: &RunConfig) -> PathBuf {
    let hash = config.hash();
    config.out_dir.join(format!(
        "{}-{}",
        config.command.name(),
        &hash[..HASH_PREFIX]
    ))
}

/// Executes a validated config and writes its bundle.
pub fn execute(config: &RunConfig) -> Result<ReportBundle> {
    let dir = run_dir(config);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Output {
        dir: dir.clone(),
        tol: config.tol,
        format: config.format,
        full: config.full,
        artifacts: Vec::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()?;
    let checks = pool.install(|| dispatch(config, &mut out))?;

    let bundle = ReportBundle {
        schema_version: SCHEMA_VERSION,
        metadata: RunMetadata {
            command: config.command.name().to_string(),
            config_hash: config.hash(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tol_abs: config.tol.abs,
            tol_rel: config.tol.rel,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.canonical(),
        },
        checks,
        artifacts: {
            let mut a = out.artifacts.clone();
            a.push(BUNDLE_FILE.to_string());
            a
        },
    };
    write_bundle(&dir, &bundle)?;
    Ok(bundle)
}

fn write_bundle(dir: &Path, bundle: &ReportBundle) -> Result<()> {
    let mut text = serde_json::to_string_pretty(bundle)?;
    text.push('\n');
    let path = dir.join(BUNDLE_FILE);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs the command. Module errors become FAIL checks; only I/O problems
/// with the run directory are returned as errors.
fn dispatch(config: &RunConfig, out: &mut Output) -> Result<Vec<Check>> {
    let cmd = &config.command;
    let mut checks = Vec::new();
    let outcome = match cmd {
        Command::Singular(a) => commands::singular(cmd, a, out, &mut checks),
        Command::Shoot(a) => commands::shoot_cmd(cmd, a, out, &mut checks),
        Command::Branch(a) => commands::branch(cmd, a, out, &mut checks),
        Command::FindExponent(a) => commands::find_exponent_cmd(cmd, a, out, &mut checks),
        Command::Continuity(a) => commands::continuity(cmd, a, out, &mut checks),
        Command::Morse(a) => commands::morse(cmd, a, out, &mut checks),
        Command::Hardy(a) => commands::hardy(cmd, a, out, &mut checks),
        Command::VerifyAll(a) => commands::verify_all(cmd, a, out, &mut checks),
        Command::Sweep(a) => {
            let (points, computed) = sweep::run_points(a, out)?;
            sweep::write_table(&points, out)?;
            let declared = sweep::declared(a)?;
            let declared: Vec<(&str, &str)> =
                declared.iter().map(|(n, a)| (n.as_str(), *a)).collect();
            return Ok(complete(&declared, sweep::checks(&points, computed), None));
        }
    };
    let error = match outcome {
        Ok(()) => None,
        Err(e) => {
            log::error!("{}: {e:#}", cmd.name());
            Some(format!("{e:#}"))
        }
    };
    Ok(complete(&commands::declared(cmd), checks, error))
}

/// Full command-line entry point; returns the process exit code.
pub fn run(argv: Vec<OsString>) -> i32 {
    let config = match config::load(argv) {
        Ok(c) => c,
        Err(ConfigError::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match execute(&config) {
        Ok(bundle) => {
            print!("{}", commands::summary(&bundle.checks));
            println!("bundle: {}", run_dir(&config).join(BUNDLE_FILE).display());
            bundle.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

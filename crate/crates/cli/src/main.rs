//! `shortcut-audit` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid input (bad flags, unreadable or
//! malformed files, schema violations), 1 for anything else.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AggregateArgs, AuditArgs, BalanceArgs, FilterArgs, LabelArgs, MatchArgs, ProbeArgs, SimulateArgs, SynthArgs};

#[derive(Parser)]
#[command(name = "shortcut-audit", version, about = "Score-level shortcut and AUC-paradox audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the shortcut battery over one or all schema attributes.
    Audit(AuditArgs),
    /// Binormal sweeps over prevalence and bias or over (p0, p1).
    Simulate(SimulateArgs),
    /// Train and evaluate a logistic-regression attribute probe.
    Probe(ProbeArgs),
    /// Balanced sampling weights over attribute value and label.
    Balance(BalanceArgs),
    /// Label exams from biopsy and follow-up history.
    Label(LabelArgs),
    /// Aggregate image scores to exam scores.
    Aggregate(AggregateArgs),
    /// Keep only exams with one attribute value.
    Filter(FilterArgs),
    /// Prevalence-matched evaluation set.
    Match(MatchArgs),
    /// Write a synthetic two-value exam set drawn from the binormal model.
    Synth(SynthArgs),
}

/// Error with its exit code.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Internal(String),
}

impl From<shortcut_audit::Error> for CliError {
    fn from(e: shortcut_audit::Error) -> Self {
        if e.is_validation() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var("SHORTCUT_AUDIT_THREADS") else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("SHORTCUT_AUDIT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Audit(a) => commands::audit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Probe(a) => commands::probe(a),
        Command::Balance(a) => commands::balance(a),
        Command::Label(a) => commands::label(a),
        Command::Aggregate(a) => commands::aggregate(a),
        Command::Filter(a) => commands::filter(a),
        Command::Match(a) => commands::match_prevalence(a),
        Command::Synth(a) => commands::synth(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

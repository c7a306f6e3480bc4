//! Report emission. JSON output is deterministic for a fixed config and seed:
//! field order is fixed by the struct, map keys are sorted, and the timestamp
//! is the only line that varies between runs.

use std::fs::File;
use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use selfsim::report::Report;
use selfsim::Error;

use crate::commands::Outcome;
use crate::{Cli, Format};

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    config: &'a Value,
    library_version: &'a str,
    precision_bits: u32,
    max_precision_bits: u32,
    seed: u64,
    timestamp: u64,
    report: &'a Report,
}

fn sink(cli: &Cli) -> io::Result<Box<dyn Write>> {
    match &cli.output {
        Some(path) => Ok(Box::new(File::create(path)?)),
        None => Ok(Box::new(io::stdout())),
    }
}

pub fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), Error> {
    match cli.format {
        Format::Json => emit_json(cli, outcome),
        Format::Csv => emit_csv(cli, outcome),
    }
}

fn emit_json(cli: &Cli, outcome: &Outcome) -> Result<(), Error> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let envelope = Envelope {
        command: &outcome.command,
        config: &outcome.config_echo,
        library_version: env!("CARGO_PKG_VERSION"),
        precision_bits: cli.precision,
        max_precision_bits: cli.max_precision,
        seed: cli.seed,
        timestamp,
        report: &outcome.report,
    };
    let text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {}", e)))?;
    let mut out = sink(cli).map_err(io_err)?;
    writeln!(out, "{}", text).map_err(io_err)?;
    Ok(())
}

fn emit_csv(cli: &Cli, outcome: &Outcome) -> Result<(), Error> {
    let csv = outcome.csv.as_ref().ok_or_else(|| {
        Error::InvalidInput(format!(
            "{} has no tabular form; use --format json",
            outcome.command
        ))
    })?;
    let out = sink(cli).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&csv.headers).map_err(csv_err)?;
    for row in &csv.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn emit_error(cli: &Cli, err: &Error) {
    let body = serde_json::json!({
        "error": {
            "kind": error_kind(err),
            "message": err.to_string(),
        }
    });
    let text = serde_json::to_string_pretty(&body).expect("error body serializes");
    match sink(cli) {
        Ok(mut out) => {
            let _ = writeln!(out, "{}", text);
        }
        Err(_) => eprintln!("{}", text),
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::NoConvergence { .. } => "no_convergence",
        Error::MemoryBudget { .. } => "memory_budget",
        Error::BudgetExceeded(_) => "budget_exceeded",
        Error::AmbiguousCollapse { .. } => "ambiguous_collapse",
        Error::AmbiguousBreakpoint(_) => "ambiguous_breakpoint",
        Error::DegenerateRoot(_) => "degenerate_root",
        Error::InvalidInput(_) => "invalid_input",
    }
}

fn io_err(e: io::Error) -> Error {
    Error::InvalidInput(format!("output failed: {}", e))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output failed: {}", e))
}

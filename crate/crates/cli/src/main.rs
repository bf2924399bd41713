//! `rabi`: spectra of the quantum Rabi model and small asymmetric Dicke
//! models from the command line.
//!
//! Exit codes: 0 on success, 1 when a computation fails (or `verify`
//! reports a failed check), 2 for invalid configuration.

mod commands;
mod grid;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rabi_spectra::precision::{default_bits_from_env, DOUBLE_BITS, MAX_BITS};
use rabi_spectra::SeriesConfig;

use commands::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] rabi_spectra::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            // parameter errors from the library are configuration errors too
            CliError::Compute(rabi_spectra::Error::InvalidParameter(_)) => 2,
            CliError::Compute(rabi_spectra::Error::PreconditionViolated(_)) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rabi", version, about = "Exact spectra of the quantum Rabi and asymmetric Dicke models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Starting working precision in bits (default: RABI_PRECISION_BITS or 53).
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
}

fn series_config(flag: Option<u32>) -> Result<SeriesConfig, CliError> {
    let bits = match flag {
        Some(b) => b,
        None => default_bits_from_env().map_err(CliError::Config)?,
    };
    if !(DOUBLE_BITS..=4096).contains(&bits) {
        return Err(CliError::Config(format!("precision must lie in [{DOUBLE_BITS}, 4096] bits, got {bits}")));
    }
    Ok(SeriesConfig { base_bits: bits, max_bits: bits.max(MAX_BITS), ..SeriesConfig::default() })
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let series = series_config(cli.precision_bits)?;
    let report = commands::run(&cli.command, series)?;
    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Csv => report.table.write_csv(&mut out)?,
        Format::Json => report.table.write_json(&mut out)?,
    }
    out.flush()?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("rabi: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("rabi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

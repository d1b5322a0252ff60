//! The `evobeam` command line: configuration files, command dispatch and
//! report formatting.
//!
//! Exit statuses: 0 pass, 1 a study or probe missed its criterion, 2 the
//! model fails a well-posedness check, 3 I/O failure, 4 usage or
//! configuration error.

mod commands;
mod config;

pub use commands::{
    build_source, check_levels, cmd_check, cmd_converge, cmd_probe, cmd_run, convergence_study, exit_code,
    initial_state, scheme_params, seed, write_csv, write_snapshots, ProbeKind, EXIT_FAIL, EXIT_ILL_POSED, EXIT_IO,
    EXIT_USAGE, SEED_VAR,
};
pub use config::{
    emit_config, parse_config, InitialKind, OutputConfig, RunConfig, ScenarioConfig, SchemeConfig, SourceConfig,
    TraceSelection,
};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "evobeam", version, about = "Boundary damped Timoshenko beam simulations and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coercivity, rho0, solution bound, skew defect and trace-law checks.
    Check { config: PathBuf },
    /// Time integration; writes the energy/trace CSV and optional snapshots.
    Run { config: PathBuf },
    /// Convergence study over a list of grid sizes.
    Converge {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
    },
    /// Causality or solution-bound probe.
    Probe {
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: ProbeKind,
        /// Split time for the causality probe.
        #[arg(long)]
        a: Option<f64>,
    },
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Runs one invocation and returns its exit status.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = (|| match &cli.command {
        Command::Check { config } => cmd_check(&load_config(config)?, out),
        Command::Run { config } => cmd_run(&load_config(config)?, out),
        Command::Converge { config, levels } => {
            check_levels(levels)?;
            cmd_converge(&load_config(config)?, levels, out)
        }
        Command::Probe { config, kind, a } => cmd_probe(&load_config(config)?, *kind, *a, out),
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

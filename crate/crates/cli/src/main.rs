//! `spingate` command-line front end.
//!
//! Data goes to stdout or `--out`; diagnostics and the echoed seed go to
//! stderr. Exit codes: 0 success, 2 config or usage error, 3 numerical
//! domain error, 1 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::Rng;

use crate::commands::{ProtocolArgs, Rendered};
use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{emit, Metadata};

const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "spingate",
    version,
    about = "Spin-conditioned photon transmission gate simulator"
)]
struct Cli {
    /// Scenario configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// RNG seed; overrides the config. Drawn from entropy when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials for `protocol`; overrides the config.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output path; overrides the block's `out` field. Default: stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Include heralded state vectors in protocol reports.
    #[arg(long, global = true)]
    dump_state: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmission/reflection spectra and gate fidelity as CSV.
    Spectra,
    /// Run a heralded protocol and write a JSON report.
    Protocol,
    /// Dephasing curve (t, offdiag, fidelity) as CSV.
    Decoherence,
    /// Gate operator queries.
    Gate {
        #[command(subcommand)]
        action: GateAction,
    },
}

#[derive(Debug, Subcommand)]
enum GateAction {
    /// Print the gate diagonal and its fidelity as JSON.
    Describe,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config: a scenario file is required".into()))?;
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("--config: cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::Config(format!("--config: {} is not UTF-8", path.display())))?;
    let cfg = ScenarioConfig::parse(text)?;
    cfg.validate()?;

    let seed = match cli.seed.or(cfg.seed) {
        Some(s) => s,
        None => {
            let s = rand::rng().random::<u64>();
            eprintln!("seed: {s}");
            s
        }
    };
    let meta = Metadata::new(&bytes, seed);
    log::info!("config {} (sha256 {})", path.display(), meta.config_sha256);

    let rendered: Rendered = match cli.command {
        Command::Spectra => commands::spectra(&cfg, &meta)?,
        Command::Decoherence => commands::decoherence(&cfg, &meta)?,
        Command::Gate {
            action: GateAction::Describe,
        } => commands::gate_describe(&cfg, &meta)?,
        Command::Protocol => {
            let args = ProtocolArgs {
                seed,
                trials: cli.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS),
                dump_state: cli.dump_state,
            };
            commands::protocol(&cfg, &meta, &args)?
        }
    };
    let out = cli.out.clone().or(rendered.out.map(PathBuf::from));
    emit(out.as_deref(), &rendered.content)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

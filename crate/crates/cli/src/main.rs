//! Command-line front-end: configure a scenario, run the weak-measurement
//! pipeline or its oracle, and write CSV/JSON results.

mod config;
mod discrete;
mod error;
mod oracle;
mod output;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, SweepSection};
use error::CliError;

#[derive(Parser)]
#[command(name = "weakwave", version, about = "Direct measurement of a transverse wavefunction by weak measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Counting seed (overrides `counting.seed`).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Scan, reconstruct and analyse one configuration.
    Run(Common),
    /// Repeat a run over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary (overrides `sweep.parameter`).
        #[arg(long, value_name = "NAME")]
        param: Option<String>,
        /// Comma-separated values (overrides `sweep.values`).
        #[arg(long, value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Weak-value tomography of an N-level state.
    Discrete {
        /// Dimension; required without --state.
        #[arg(long)]
        dim: Option<usize>,
        /// CSV with columns `index,re,im`; a random state is drawn otherwise.
        #[arg(long, value_name = "PATH")]
        state: Option<PathBuf>,
        /// Post-selected basis state; all are used if omitted.
        #[arg(long)]
        b0: Option<usize>,
        /// Seed of the random state.
        #[arg(long, value_name = "N", default_value_t = 42)]
        seed: u64,
        /// Directory for `discrete.csv` and `discrete.json`; nothing is written if omitted.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Suppress the summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// Compare the engine with the brute-force simulation (n_points <= 256).
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, hide = true)]
        corrupt_convention: bool,
    },
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.counting.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(c) => pipeline::cmd_run(&load(&c)?.resolve()?, c.quiet),
        Command::Sweep { common, param, values } => {
            let mut cfg = load(&common)?;
            if param.is_some() || values.is_some() {
                let base = cfg.sweep.take();
                let parameter = param
                    .or_else(|| base.as_ref().map(|s| s.parameter.clone()))
                    .ok_or_else(|| CliError::Validation("sweep.parameter: not given".into()))?;
                let values = values
                    .or_else(|| base.map(|s| s.values))
                    .ok_or_else(|| CliError::Validation("sweep.values: not given".into()))?;
                cfg.sweep = Some(SweepSection { parameter, values });
            }
            pipeline::cmd_sweep(&cfg.resolve()?, common.quiet)
        }
        Command::Discrete {
            dim,
            state,
            b0,
            seed,
            out,
            quiet,
        } => discrete::cmd_discrete(discrete::DiscreteArgs {
            dim,
            state: state.as_deref(),
            b0,
            seed,
            out: out.as_deref(),
            quiet,
        }),
        Command::Oracle {
            common,
            corrupt_convention,
        } => oracle::cmd_oracle(&load(&common)?.resolve()?, corrupt_convention, common.quiet),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakwave: {e}");
            e.exit_code()
        }
    }
}

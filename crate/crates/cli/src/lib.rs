//! Command-line front end for the swarmlink models.
//!
//! `swarmlink <subcommand> --config scenario.json --out DIR` loads one JSON
//! scenario, validates all of it, runs the requested model and writes CSV,
//! JSON or text artifacts. Errors are a single `error[<kind>] ...` line on
//! stderr with a kind-specific exit code.

// `!(x > 0.0)` is used on purpose: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use swarmlink::linkbudget::BudgetMode;

pub use error::CliError;

use commands::{ChannelParts, RunOptions};
use output::Writer;

#[derive(Debug, Parser)]
#[command(
    name = "swarmlink",
    version,
    about = "Deterministic swarm-UAV flight and link simulator"
)]
pub struct Cli {
    /// Scenario file (JSON).
    #[arg(long, short, global = true, default_value = "scenario.json")]
    pub config: PathBuf,
    /// Directory for artifacts; created if missing.
    #[arg(long, short, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Top-level seed; overrides the scenario's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Link-budget mode; overrides the scenario's `budget.mode`.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Use worker threads where results are thread-count independent.
    #[arg(long, global = true)]
    pub parallel: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Printed totals replace computed sums.
    Paper,
    /// Every total is the sum of its items.
    Corrected,
}

impl From<ModeArg> for BudgetMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => BudgetMode::PaperLiteral,
            ModeArg::Corrected => BudgetMode::CorrectedSum,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly each UAV to its hold point through the full dynamics.
    Dynamics,
    /// Turbulence spectra, a synthesized gust record, shear and drag.
    Wind,
    /// PSO, GWO and WPA on a benchmark function.
    Optimize,
    /// Leader-follower formation flight.
    Formation,
    /// Path-loss sweep, QPSK constellations and BER curves.
    Channel {
        #[arg(long)]
        sweep: bool,
        #[arg(long)]
        constellation: bool,
        #[arg(long)]
        ber: bool,
    },
    /// Link-budget ledger and report.
    Budget,
    /// BER against distance over a free-space link.
    Berdist,
    /// Topology, routing against flooding, and an optional APF path.
    Network,
    /// Check the whole scenario and list every violation; writes nothing.
    Validate,
}

/// Runs one invocation and returns the process exit code on success.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = config::load(&cli.config)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let opts = RunOptions {
        mode: cli.mode.map(Into::into),
        parallel: cli.parallel,
    };
    let overrides = cfg.outputs.iter().map(|o| (o.what.clone(), o.path.clone())).collect();
    let mut out = Writer::new(&cli.out, overrides);
    match cli.command {
        Command::Dynamics => commands::dynamics(&cfg, &mut out)?,
        Command::Wind => commands::wind(&cfg, &mut out)?,
        Command::Optimize => commands::optimize(&cfg, opts, &mut out)?,
        Command::Formation => commands::formation(&cfg, &mut out)?,
        Command::Channel {
            sweep,
            constellation,
            ber,
        } => commands::channel(
            &cfg,
            ChannelParts {
                sweep,
                constellation,
                ber,
            },
            opts,
            &mut out,
        )?,
        Command::Budget => commands::budget(&cfg, opts, &mut out)?,
        Command::Berdist => commands::berdist(&cfg, &mut out)?,
        Command::Network => commands::network(&cfg, &mut out)?,
        Command::Validate => {
            let v = commands::validate(&cfg);
            if v.is_empty() {
                println!("ok: {}", cli.config.display());
                return Ok(0);
            }
            for line in &v {
                println!("{line}");
            }
            println!("{} violation(s)", v.len());
            return Ok(1);
        }
    }
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

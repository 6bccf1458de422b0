//! `sqr` command-line front end: configuration handling and CSV emitters for
//! the analysis and simulation toolkit in `sqr_core`.

// range checks are written as `!(lo <= x)` on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sqr_core::constraints::VerifyOptions;

use crate::commands::{Figure2Params, OverheadParams};
use crate::config::{parse_attack, parse_pairs, parse_traffic, Loss, RunConfig};
pub use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sqr", version, about = "Secure quantum routing simulator and analysis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Leaked fraction versus channel loss.
    Figure2(Figure2Args),
    /// Slot-level protocol simulation with an optional eavesdropper.
    Simulate(SimulateArgs),
    /// Escape probabilities and overhead sizing.
    Overhead(OverheadArgs),
    /// Numerical checks on eavesdropper unitaries.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Root seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key = value configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    fn file_config(&self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => RunConfig::from_path(path),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Figure2Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub loss_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub loss_max: f64,
    #[arg(long, default_value_t = 61)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Cycles per round.
    #[arg(long = "K", alias = "k")]
    pub k: Option<u64>,
    #[arg(long)]
    pub num_nodes: Option<u32>,
    /// Comma-separated sender-receiver pairs, e.g. "0-1,2-3".
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long = "H2", alias = "h2")]
    pub h2: Option<u64>,
    #[arg(long = "H3", alias = "h3")]
    pub h3: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Channel transmissivity.
    #[arg(long = "T", alias = "t", conflicts_with = "loss_db")]
    pub t: Option<f64>,
    #[arg(long)]
    pub loss_db: Option<f64>,
    /// none | path | message | both
    #[arg(long)]
    pub attack: Option<String>,
    #[arg(long)]
    pub eta_path: Option<f64>,
    #[arg(long)]
    pub eta_msg: Option<f64>,
    /// Independent protocol rounds.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub threshold2: Option<f64>,
    #[arg(long)]
    pub threshold3: Option<f64>,
    /// full | silent
    #[arg(long)]
    pub traffic: Option<String>,
}

impl SimulateArgs {
    pub fn to_run_config(&self) -> Result<RunConfig, CliError> {
        let flags = RunConfig {
            seed: self.common.seed,
            k: self.k,
            num_nodes: self.num_nodes,
            pairs: self.pairs.as_deref().map(parse_pairs).transpose()?,
            h2: self.h2,
            h3: self.h3,
            gamma: self.gamma,
            mu: self.mu,
            loss: self.t.map(Loss::Transmissivity).or(self.loss_db.map(Loss::Db)),
            attack: self.attack.as_deref().map(parse_attack).transpose()?,
            eta_path: self.eta_path,
            eta_msg: self.eta_msg,
            trials: self.trials,
            threshold2: self.threshold2,
            threshold3: self.threshold3,
            traffic: self.traffic.as_deref().map(parse_traffic).transpose()?,
        };
        Ok(self.common.file_config()?.overlay(flags))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OverheadArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "K", alias = "k", default_value_t = 100)]
    pub k: u64,
    #[arg(long = "H3", alias = "h3", default_value_t = 20)]
    pub h3: u64,
    /// Interception rates; each row uses m = round(eta·K).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1, 0.2])]
    pub eta: Vec<f64>,
    /// Monte-Carlo trials per row (0 skips the estimate).
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Probe dimension.
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Random instances per structural check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Points in the disturbance / distinguishability scatter.
    #[arg(long, default_value_t = 1000)]
    pub scatter_samples: usize,
    /// Skip the round-trip constraint on the return leg (negative control).
    #[arg(long, hide = true)]
    pub inject_violation: bool,
}

/// Output text of a subcommand, plus whether it should exit unsuccessfully
/// after the text is written.
pub struct Outcome {
    pub text: String,
    pub failure: Option<CliError>,
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let ok = |text| Outcome { text, failure: None };
    match command {
        Command::Figure2(a) => {
            let file = a.common.file_config()?;
            let text = commands::figure2(&Figure2Params {
                gamma: a.gamma.or(file.gamma).unwrap_or(0.01),
                mu: a.mu.or(file.mu).unwrap_or(0.01),
                loss_min: a.loss_min,
                loss_max: a.loss_max,
                steps: a.steps,
            })?;
            Ok(ok(text))
        }
        Command::Simulate(a) => {
            let config = a.to_run_config()?.to_simulation()?;
            Ok(ok(commands::simulate(&config)?))
        }
        Command::Overhead(a) => {
            let file = a.common.file_config()?;
            let text = commands::overhead(&OverheadParams {
                seed: a.common.seed.or(file.seed).unwrap_or(0),
                k: a.k,
                h3: a.h3,
                etas: a.eta.clone(),
                trials: a.trials,
                epsilon: a.epsilon,
                eta_max: a.eta_max,
            })?;
            Ok(ok(text))
        }
        Command::Verify(a) => {
            let file = a.common.file_config()?;
            let (text, passed) = commands::verify(&VerifyOptions {
                dim: a.d,
                samples: a.samples,
                scatter_samples: a.scatter_samples,
                seed: a.common.seed.or(file.seed).unwrap_or(0),
                enforce_round_trip: !a.inject_violation,
            })?;
            let failure = (!passed).then(|| CliError::VerificationFailed("one or more invariants failed".into()));
            Ok(Outcome { text, failure })
        }
    }
}

fn common(command: &Command) -> &CommonArgs {
    match command {
        Command::Figure2(a) => &a.common,
        Command::Simulate(a) => &a.common,
        Command::Overhead(a) => &a.common,
        Command::Verify(a) => &a.common,
    }
}

/// Runs a parsed command line, writing output to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let outcome = execute(&cli.command)?;
    match &common(&cli.command).out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => stdout.write_all(outcome.text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })?,
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn t_and_loss_db_conflict() {
        let r = Cli::try_parse_from(["sqr", "simulate", "--T", "0.5", "--loss-db", "1"]);
        assert!(r.is_err());
    }

    #[test]
    fn eta_list_parses() {
        let cli = Cli::try_parse_from(["sqr", "overhead", "--eta", "0.1,0.3"]).unwrap();
        match cli.command {
            Command::Overhead(a) => assert_eq!(a.eta, vec![0.1, 0.3]),
            _ => unreachable!(),
        }
    }
}

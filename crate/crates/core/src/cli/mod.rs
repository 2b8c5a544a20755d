//! Command-line front end.
//!
//! Subcommands: `simulate`, `compare`, `bench` and `fpt-table`. Failures exit
//! with status 1 and print a one-line JSON object `{"error": kind, "message":
//! text}` on stderr.

mod commands;
mod report;

pub use commands::{
    cmd_bench, cmd_compare, cmd_fpt_table, cmd_simulate, load_spec, BenchOptions, CompareOptions, FptTableOptions,
    NeuronSummary, SimulateOptions, SimulateSummary,
};
pub use report::{BenchReport, Machine, MethodHistograms, NeuronKs, Seeds, SimReport, Timings, REPORT_VERSION};
pub use crate::stats::ks_statistic;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::fpt::FptError;
use crate::mc::McError;
use crate::models::ModelError;
use crate::sim::SimError;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Fpt(#[from] FptError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Model(_) => "invalid_spec",
            Self::Sim(SimError::AvalancheDetected { .. }) => "avalanche",
            Self::Sim(_) => "simulation",
            Self::Mc(_) => "monte_carlo",
            Self::Fpt(_) => "first_passage",
            Self::Stats(_) => "statistics",
            Self::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// `{"error": kind, "message": text}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "countdown", version, about = "Event-driven simulation of noisy integrate-and-fire networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Event-based ensemble: spike CSV, histogram and summary.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 0.02)]
        bin_width: f64,
    },
    /// Event-based versus Euler and EulerGobet spike-time distributions.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        runs: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 0.02)]
        bin_width: f64,
    },
    /// Wall-clock comparison of the three methods.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        runs: usize,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Tabulated first-passage law of one neuron as CSV.
    FptTable {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        neuron: usize,
        /// Start value (default: the reset value).
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        /// Start current (exponential-synapse models).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        current: f64,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs a parsed command and returns the text for stdout.
pub fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Simulate { spec, seed, runs, out, horizon, bin_width } => {
            let summary = cmd_simulate(&SimulateOptions { spec, seed, runs, out, horizon, bin_width })?;
            Ok(serde_json::to_string_pretty(&summary).expect("summaries serialize"))
        }
        Command::Compare { spec, seed, runs, dt, out, horizon, bin_width } => {
            let report = cmd_compare(&CompareOptions { spec, seed, runs, dt, out, horizon, bin_width })?;
            let mut text = String::from("neuron  event/euler  event/euler_gobet  euler/euler_gobet\n");
            for k in &report.ks {
                text += &format!(
                    "{:<7} {:<12.4} {:<18.4} {:.4}\n",
                    k.neuron, k.event_vs_euler, k.event_vs_euler_gobet, k.euler_vs_euler_gobet
                );
            }
            Ok(text)
        }
        Command::Bench { spec, seed, runs, dt, out, horizon } => {
            Ok(cmd_bench(&BenchOptions { spec, seed, runs, dt, out, horizon })?.table())
        }
        Command::FptTable { spec, neuron, start, current, horizon, dt, paths, seed, out } => {
            let table = cmd_fpt_table(&FptTableOptions { spec, neuron, start, current, horizon, dt, paths, seed, out: out.clone() })?;
            Ok(format!("wrote {} points, hit mass {:.6}, to {}", table.grid().len(), table.hit_mass(), out.display()))
        }
    }
}

/// Entry point of the binary; returns the process exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}

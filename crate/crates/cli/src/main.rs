//! `pqnet`: feasibility checks, simulation, adversary detection and KMS
//! scaling for PQC-protected quantum networks.
//!
//! Exit codes: 0 success, 1 negative verdict (infeasible timing or a flagged
//! detector), 2 malformed input or I/O failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pqnet", version, about)]
pub struct Cli {
    /// Master seed; overrides the scenario's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory that receives written artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Rendering of the result printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KmsModeArg {
    FullMesh,
    Hierarchical,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the scenario's timing inequality.
    Check { scenario: PathBuf },

    /// Monte Carlo run; writes trials.csv and summary.json.
    Simulate {
        scenario: PathBuf,
        /// Number of trials; defaults to the scenario's `n_trials`.
        #[arg(long)]
        trials: Option<u64>,
    },

    /// QBER detector against the scenario's adversary; writes report.json
    /// and samples.csv. Exits 1 when the detector flags.
    Adversary {
        scenario: PathBuf,
        /// Trials on the intercepted side; defaults to `n_trials`.
        #[arg(long)]
        trials: Option<u64>,
        /// Trials on the clean baseline side; defaults to `--trials`.
        #[arg(long)]
        baseline_trials: Option<u64>,
        /// Measured pairs behind each QBER sample.
        #[arg(long, default_value_t = 1000)]
        pairs: u64,
        /// Detector threshold in baseline standard errors.
        #[arg(long, default_value_t = 3.0)]
        threshold: f64,
    },

    /// Handshake counts and re-key time; writes kms.csv.
    Kms {
        /// JSON KMS configuration; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Node counts to evaluate (comma separated).
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<u64>,
        #[arg(long, value_enum, default_value_t = KmsModeArg::Both)]
        mode: KmsModeArg,
        #[arg(long)]
        cluster_size: Option<u64>,
        /// Seconds per handshake, KEM latency included.
        #[arg(long)]
        handshake_time: Option<f64>,
        #[arg(long)]
        t_auth: Option<f64>,
        #[arg(long)]
        parallelism: Option<u64>,
    },

    /// One Monte Carlo run per value of a scenario field; writes sweep.csv
    /// and sweep.json.
    Sweep {
        scenario: PathBuf,
        /// Dotted path of a numeric field, e.g. `nodes.2.memory.t_coh`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        trials: Option<u64>,
    },

    /// List the crypto-profile registry.
    Profiles {
        /// Include this scenario's own profiles.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Negative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Verdict::Ok) => ExitCode::from(0),
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

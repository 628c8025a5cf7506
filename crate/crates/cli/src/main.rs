//! Command-line front end for the exact two-stroke refrigerator simulator.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a verification
//! check failed, 3 a stationary catalyst was requested but the cycle does not
//! pin it down uniquely (the report is still written).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "qfridge",
    version,
    about = "Exact simulator and search for catalyst-assisted two-stroke quantum refrigerators",
    disable_help_subcommand = true
)]
pub struct Cli {
    /// Inverse temperature of the hot bath
    #[arg(long, global = true, value_name = "BETA", allow_negative_numbers = true)]
    pub beta_h: Option<f64>,

    /// Inverse temperature of the cold bath
    #[arg(long, global = true, value_name = "BETA", allow_negative_numbers = true)]
    pub beta_c: Option<f64>,

    /// Level splitting of the qubit coupled to the hot bath
    #[arg(long, global = true, value_name = "OMEGA", allow_negative_numbers = true)]
    pub omega_h: Option<f64>,

    /// Level splitting of the qubit coupled to the cold bath
    #[arg(long, global = true, value_name = "OMEGA", allow_negative_numbers = true)]
    pub omega_c: Option<f64>,

    /// JSON run configuration; command-line flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Numeric tolerance (this flag beats QFRIDGE_TOL, which beats the config file; default 1e-10)
    #[arg(long, global = true, value_name = "TOL", allow_negative_numbers = true)]
    pub tol: Option<f64>,

    /// Seed for randomized checks
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Report format
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    pub format: Option<OutputFormat>,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List all 24 one-level cycles with closed-form cross-checks
    Table1,

    /// Run one machine cycle in detail
    Simulate {
        /// Cycle permutation: pi_opt, pi_1, pi_2, or a JSON array like [0,2,1,3]
        #[arg(long, value_name = "PERM")]
        permutation: Option<String>,

        /// Number of catalyst levels for the pi_1 family
        #[arg(long, value_name = "D")]
        levels: Option<usize>,

        /// First segment length for the pi_2 family
        #[arg(long, value_name = "N")]
        n: Option<usize>,

        /// Second segment length for the pi_2 family
        #[arg(long, value_name = "N_PRIME")]
        n_prime: Option<usize>,

        /// Catalyst distribution: stationary, or a JSON array like [0.3,0.7]
        #[arg(long, value_name = "P")]
        catalyst: Option<String>,
    },

    /// Search every joint permutation for a fixed number of catalyst levels
    Search {
        /// Number of catalyst levels
        #[arg(long, default_value_t = 2, value_name = "D")]
        d: usize,
    },

    /// Scan bath-ratio space for coolability regions
    Region {
        /// Smallest beta_c / beta_h ratio
        #[arg(long, default_value_t = 0.5, value_name = "R")]
        beta_min: f64,

        /// Largest beta_c / beta_h ratio
        #[arg(long, default_value_t = 5.0, value_name = "R")]
        beta_max: f64,

        /// Number of beta ratio samples
        #[arg(long, default_value_t = 50, value_name = "STEPS")]
        beta_steps: usize,

        /// Smallest omega_c / omega_h ratio
        #[arg(long, default_value_t = 0.05, value_name = "R")]
        omega_min: f64,

        /// Largest omega_c / omega_h ratio
        #[arg(long, default_value_t = 5.0, value_name = "R")]
        omega_max: f64,

        /// Number of omega ratio samples
        #[arg(long, default_value_t = 50, value_name = "STEPS")]
        omega_steps: usize,

        /// Comma-separated catalyst level caps
        #[arg(long, default_value = "1,2,4,1000000", value_name = "CAPS")]
        caps: String,
    },

    /// Tabulate the single-loop performance curve over catalyst sizes
    CopCurve,

    /// Run the invariant self-checks
    Verify,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

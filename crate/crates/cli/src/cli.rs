use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Suite;

/// Verification harness for equivariant Toeplitz indices, spectral flow,
/// truncated eta invariants and fixed-point densities.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on a
/// configuration or I/O error.
#[derive(Debug, Parser)]
#[command(name = "oddindex", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spin traces through the symbol map versus direct traces.
    CliffordCheck(ScenarioArgs),
    /// Equivariant index of the Toeplitz operator versus the winding number.
    Index(ScenarioArgs),
    /// Spectral flow of the Dirac and projection paths versus the index.
    Specflow(ScenarioArgs),
    /// Heat-integral index formula and the variation of the eta function.
    Eta(ScenarioArgs),
    /// Fixed-point densities: circle calibration and optional user data.
    Lefschetz(ScenarioArgs),
    /// Every suite listed in the scenario (all of them by default).
    VerifyAll(ScenarioArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CliffordCheck(_) => "clifford-check",
            Command::Index(_) => "index",
            Command::Specflow(_) => "specflow",
            Command::Eta(_) => "eta",
            Command::Lefschetz(_) => "lefschetz",
            Command::VerifyAll(_) => "verify-all",
        }
    }

    pub fn args(&self) -> &ScenarioArgs {
        match self {
            Command::CliffordCheck(a)
            | Command::Index(a)
            | Command::Specflow(a)
            | Command::Eta(a)
            | Command::Lefschetz(a)
            | Command::VerifyAll(a) => a,
        }
    }

    /// The single suite of a suite subcommand; `None` for `verify-all`.
    pub fn suite(&self) -> Option<Suite> {
        match self {
            Command::CliffordCheck(_) => Some(Suite::CliffordCheck),
            Command::Index(_) => Some(Suite::Index),
            Command::Specflow(_) => Some(Suite::Specflow),
            Command::Eta(_) => Some(Suite::Eta),
            Command::Lefschetz(_) => Some(Suite::Lefschetz),
            Command::VerifyAll(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML); flags override its values.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print the JSON report to stdout instead of the table.
    #[arg(long)]
    pub json: bool,
    /// Leave wall-clock times out of the report, making it byte-stable.
    #[arg(long)]
    pub omit_timing: bool,
    /// Seed for the random elements and operator pairs.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Loop specification file.
    #[arg(long = "loop", value_name = "FILE", conflicts_with = "winding", help_heading = "Model")]
    pub loop_file: Option<PathBuf>,
    /// Diagonal loop diag(z^k₁, z^k₂, …), e.g. `--winding=2,-2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, help_heading = "Model")]
    pub winding: Option<Vec<i64>>,
    /// Order p of the rotation group ℤ_p.
    #[arg(long, help_heading = "Model")]
    pub group_order: Option<usize>,
    /// Fourier truncation Λ (modes |n| ≤ Λ); defaults to the guard band.
    #[arg(long, help_heading = "Model")]
    pub truncation: Option<usize>,

    /// Number of uniform samples along each path.
    #[arg(long, help_heading = "Spectral flow")]
    pub grid: Option<usize>,
    /// Fixed level offset δ for the Dirac path.
    #[arg(long, help_heading = "Spectral flow")]
    pub delta: Option<f64>,
    /// Level offset δ for the projection path.
    #[arg(long, help_heading = "Spectral flow")]
    pub p_delta: Option<f64>,

    /// Heat parameter ε; defaults to the bottom of the admissible window.
    #[arg(long, help_heading = "Eta")]
    pub epsilon: Option<f64>,
    /// Starting Gauss–Legendre order; doubled until converged.
    #[arg(long, help_heading = "Eta")]
    pub quadrature_order: Option<usize>,
    /// Evaluate at the single group element g^k instead of all of them.
    #[arg(long, help_heading = "Eta")]
    pub h_power: Option<i64>,
    /// Random operator pairs for the variation check.
    #[arg(long, help_heading = "Eta")]
    pub variation_pairs: Option<usize>,

    /// Odd Clifford dimensions, e.g. `--dims 3,5,7`.
    #[arg(long, value_delimiter = ',', help_heading = "Clifford")]
    pub dims: Option<Vec<usize>>,
    /// Random elements per dimension.
    #[arg(long, help_heading = "Clifford")]
    pub samples: Option<usize>,

    /// Fixed-point data file with an `expected` value.
    #[arg(long, value_name = "FILE", help_heading = "Lefschetz")]
    pub fixed_point: Option<PathBuf>,
}

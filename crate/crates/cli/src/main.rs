//! `hto`: compute, synthesize and decide heat transfer operators from JSON artifacts.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hto_core::analysis::lep::{LEP_TOL, MIN_STARTS};
use hto_core::synthesis::chain::DELTA_TOL;
use hto_core::synthesis::NuFamily;

/// Default bound on the dense-versus-structured heat disagreement.
pub const HEAT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "hto", version, about = "Heat transfer operators of quantum channels")]
pub struct Cli {
    /// Inverse temperature (overrides the value stored in a realization file).
    #[arg(long, global = true, value_parser = positive)]
    pub beta: Option<f64>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Allowed |Δ_achieved − Δ_target|; may only be tightened.
    #[arg(long, global = true, default_value_t = DELTA_TOL, value_parser = tightening(DELTA_TOL))]
    pub tol_delta: f64,

    /// Allowed negative entropic slack; may only be tightened.
    #[arg(long, global = true, default_value_t = LEP_TOL, value_parser = tightening(LEP_TOL))]
    pub tol_lep: f64,

    /// Allowed dense-versus-structured heat disagreement; may only be tightened.
    #[arg(long, global = true, default_value_t = HEAT_TOL, value_parser = tightening(HEAT_TOL))]
    pub tol_heat: f64,

    /// Output file, replaced atomically; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(1.0)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// HTO, induced channel and entropic slack of a dense realization.
    HtoCompute {
        /// Realization JSON, bare or under a `realization` key.
        realization: PathBuf,
        #[arg(long, default_value_t = MIN_STARTS)]
        samples: usize,
    },
    /// Landauer erasure with a prescribed HTO.
    ErasureSynth {
        #[arg(long)]
        q: PathBuf,
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Complete erasure to a mixed state with a prescribed HTO.
    CompleteErasureSynth {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        rho0: PathBuf,
        /// Sites of the Y chain.
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Swap realization attaining the entropic bound with equality.
    SwapCase {
        #[arg(long)]
        rho0: PathBuf,
        /// Unitary applied before the swap; identity when absent.
        #[arg(long)]
        w: Option<PathBuf>,
    },
    /// Admissibility decisions.
    Decide {
        #[command(subcommand)]
        kind: Decide,
    },
    /// Heat transfer matrix of `Q` relative to a Kraus set.
    ExtractQ {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        channel: PathBuf,
    },
    /// Widens an admissible heat matrix by a positive-definite `s`.
    WidenQ {
        /// Heat matrix, or a heat certificate.
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        s: PathBuf,
    },
    /// Entropic versus extremal bounds along the `E_t` family (CSV).
    StudyEt {
        #[arg(long)]
        x: PathBuf,
        #[arg(long = "t", value_delimiter = ',', default_values_t = [0.5, 0.1, 0.01])]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Materializes a small chain and compares it with the structured accounting.
    OracleCheck {
        #[arg(long)]
        q: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, short = 'n', default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        tail_bound: f64,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Decide {
    /// Minimizes the entropic slack of `Q` for a channel.
    Lep {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = MIN_STARTS)]
        samples: usize,
    },
    /// Complete erasure to `ρ_0`.
    Complete {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        rho0: PathBuf,
    },
    /// Extremal channel given by a minimal Kraus set.
    Extremal {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        channel: PathBuf,
    },
}

/// Final state of an erasure: a density matrix file or a basis vector.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Target {
    #[arg(long)]
    pub rho0: Option<PathBuf>,
    /// Index of the computational basis vector to erase to.
    #[arg(long)]
    pub pure: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    /// Sites of the X chain.
    #[arg(long, short = 'n', default_value_t = 30)]
    pub n: usize,
    /// Bound on the truncation tail `ε_tail`.
    #[arg(long, default_value_t = 1e-8)]
    pub tail_bound: f64,
    /// Divergence scale of the level schedules.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Schedule family: geodesic, exponential or rational.
    #[arg(long, default_value = "geodesic")]
    pub family: NuFamily,
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a finite positive number, got {s}"))
    }
}

fn tightening(default: f64) -> impl Fn(&str) -> Result<f64, String> + Clone + Send + Sync + 'static {
    move |s: &str| {
        let x = positive(s)?;
        if x <= default {
            Ok(x)
        } else {
            Err(format!("tolerances may only be tightened; the default is {default:e}"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

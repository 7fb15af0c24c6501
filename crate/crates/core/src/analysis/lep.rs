//! The entropic lower bound on heat and its consequences.

use rand::Rng;

use super::optimize::multistart_minimize;
use crate::channel::KrausChannel;
use crate::error::{HtoError, Result};
use crate::linalg::{self, c, Mat};
use crate::operator::{entropy_of_matrix, log_state, minimizer_sigma, HermitianOperator, Units};
use crate::random;

/// Minimum slack below which the bound counts as violated.
pub const LEP_TOL: f64 = 1e-8;
pub const MIN_STARTS: usize = 32;
const LOG_FLOOR: f64 = 1e-300;

/// Result of minimizing `tr ρQ − (1/β)(S(ρ) − S(E(ρ)))` over states.
#[derive(Debug, Clone)]
pub struct LepReport {
    pub min_value: f64,
    pub argmin: Mat,
    pub admissible: bool,
}

/// Value and hermitian gradient of the slack functional.
fn slack_functional<'a>(
    channel: &'a KrausChannel,
    q: &'a Mat,
    beta: f64,
) -> impl Fn(&Mat) -> (f64, Mat) + 'a {
    move |rho: &Mat| {
        let out = channel.apply_matrix(rho);
        let value = linalg::trace_product(rho, q).re
            - (entropy_of_matrix(rho) - entropy_of_matrix(&out)) / beta;
        let log_in = log_state(rho, LOG_FLOOR);
        let log_out = log_state(&out, LOG_FLOOR);
        let grad = q + (log_in - channel.adjoint_apply(&log_out)) * c(1.0 / beta);
        (value, linalg::symmetrize(&grad))
    }
}

/// Searches for a state violating `tr ρQ ≥ (1/β)[S(ρ) − S(E(ρ))]`.
pub fn check_lep<R: Rng + ?Sized>(
    channel: &KrausChannel,
    q: &HermitianOperator,
    beta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<LepReport> {
    if q.dim() != channel.dim_in() {
        return Err(HtoError::Shape("Q and the channel input differ in dimension".into()));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(HtoError::Contract(format!("β must be finite and positive, got {beta}")));
    }
    let d = q.dim();
    let phi = slack_functional(channel, q.matrix(), beta);
    let seeds = [
        linalg::identity(d) * c(1.0 / d as f64),
        minimizer_sigma(&q.scaled(beta, Units::Dimensionless)).matrix().clone(),
    ];
    let (argmin, min_value) = multistart_minimize(&phi, d, samples, MIN_STARTS, &seeds, rng);
    Ok(LepReport {
        min_value,
        argmin,
        admissible: min_value >= -LEP_TOL,
    })
}

/// Largest entropy drop `max_ρ S(ρ) − S(E(ρ))` with its maximizer.
pub fn max_entropy_drop<R: Rng + ?Sized>(
    channel: &KrausChannel,
    samples: usize,
    rng: &mut R,
) -> (f64, Mat) {
    let d = channel.dim_in();
    let zero = Mat::zeros(d, d);
    let phi = slack_functional(channel, &zero, 1.0);
    let seeds = [linalg::identity(d) * c(1.0 / d as f64)];
    let (rho, v) = multistart_minimize(&phi, d, samples, MIN_STARTS, &seeds, rng);
    (-v, rho)
}

/// Worst value of `[S(ρ_A) − S(ρ′_A)] − [S(ρ_AX) − S(ρ′_AX)]` over random
/// joint states, where the channel acts on `A` only.
pub fn strong_subadditivity_corollary_check<R: Rng + ?Sized>(
    channel: &KrausChannel,
    ancilla_dim: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let da = channel.dim_in();
    let lifted = channel.tensor_identity(ancilla_dim)?;
    let mut worst = f64::INFINITY;
    for k in 0..samples {
        let rank = 1 + k % (da * ancilla_dim);
        let joint = random::random_state(rng, da * ancilla_dim, rank);
        worst = worst.min(ssa_slack(channel, &lifted, joint.matrix(), ancilla_dim)?);
    }
    Ok(worst)
}

/// The same entropy-drop difference for one joint state.
pub fn ssa_slack(channel: &KrausChannel, lifted: &KrausChannel, joint: &Mat, ancilla_dim: usize) -> Result<f64> {
    let da = channel.dim_in();
    let out = lifted.apply_matrix(joint);
    let rho_a = crate::operator::partial_trace(joint, &[da, ancilla_dim], &[0])?;
    let out_a = crate::operator::partial_trace(&out, &[channel.dim_out(), ancilla_dim], &[0])?;
    let left = entropy_of_matrix(&rho_a) - entropy_of_matrix(&out_a);
    let right = entropy_of_matrix(joint) - entropy_of_matrix(&out);
    Ok(left - right)
}

//! The `E_t` family: entropic versus extremal bounds on the identity coefficient.

use rand::Rng;
use serde::Serialize;

use super::heat_matrix::{reconstruct, szilard_trace};
use super::lep::max_entropy_drop;
use super::verdict::{decide_extremal_hto, Verdict};
use crate::channel::KrausChannel;
use crate::error::Result;
use crate::linalg::{self, Mat};
use crate::operator::{HermitianOperator, Units};

/// Extra dimensionless margin added to `βq_1` above the trace-test boundary.
pub const Q1_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// `1 − t²X†X` is not positive semidefinite.
    Infeasible,
    /// `{M_i†M_j}` is linearly dependent at this `t`.
    Dependent,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtRow {
    pub t: f64,
    pub status: RowStatus,
    /// `max_ρ S(ρ) − S(E_t(ρ))` in nats.
    pub b_t: Option<f64>,
    /// `B_t/β`, the identity-coefficient floor from the entropic bound.
    pub entropic_floor: Option<f64>,
    /// Smallest `α` with `α1` decided admissible for the extremal channel.
    pub extremal_floor: Option<f64>,
    /// `‖βQ(t)‖` for the nearby certified heat matrix.
    pub admissible_q_norm: Option<f64>,
    /// `tr e^{−βq(t)}` for the certified heat matrix.
    pub admissible_trace: Option<f64>,
    /// `1 − (e^{−t²} + t²)` for the uncorrected diagonal choice.
    pub literal_diag_margin: f64,
}

/// Heat matrix `diag(q_1, q_2)` with `βq_2 = t²` and `βq_1` just above the boundary.
pub fn corrected_heat_matrix(t: f64, beta: f64) -> Mat {
    let t2 = t * t;
    let bq1 = -(-(-t2).exp_m1()).ln() + Q1_MARGIN;
    linalg::diag(&[bq1 / beta, t2 / beta])
}

/// Bisects the admissibility threshold of `α1` for an extremal channel.
pub fn extremal_identity_floor(channel: &KrausChannel, beta: f64) -> Result<f64> {
    let d = channel.dim_in();
    let admissible = |alpha: f64| -> Result<bool> {
        let q = HermitianOperator::scaled_identity(d, alpha, Units::Energy);
        Ok(decide_extremal_hto(&q, channel, beta)?.verdict == Verdict::Admissible)
    };
    let (mut lo, mut hi) = (0.0, 1.0 / beta);
    while !admissible(hi)? {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-14 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One row per `t`; infeasible or dependent parameters are flagged and skipped.
pub fn et_family_study<R: Rng + ?Sized>(
    x: &Mat,
    t_grid: &[f64],
    beta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<EtRow>> {
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let t2 = t * t;
        let mut row = EtRow {
            t,
            status: RowStatus::Ok,
            b_t: None,
            entropic_floor: None,
            extremal_floor: None,
            admissible_q_norm: None,
            admissible_trace: None,
            literal_diag_margin: 1.0 - ((-t2).exp() + t2),
        };
        let channel = match KrausChannel::e_t(x, t) {
            Ok(ch) => ch,
            Err(_) => {
                row.status = RowStatus::Infeasible;
                rows.push(row);
                continue;
            }
        };
        let (b, _) = max_entropy_drop(&channel, samples, rng);
        row.b_t = Some(b);
        row.entropic_floor = Some(b / beta);
        if !channel.is_minimal() || channel.n() != 2 || !channel.is_extremal()?.extremal {
            row.status = RowStatus::Dependent;
            rows.push(row);
            continue;
        }
        row.extremal_floor = Some(extremal_identity_floor(&channel, beta)?);
        let q = corrected_heat_matrix(t, beta);
        let q_op = HermitianOperator::energy(reconstruct(&q, &channel))?;
        if decide_extremal_hto(&q_op, &channel, beta)?.verdict == Verdict::Admissible {
            let spectrum = q_op.eigenvalues();
            row.admissible_q_norm = Some(beta * spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            row.admissible_trace = Some(szilard_trace(&q, beta));
        }
        rows.push(row);
    }
    Ok(rows)
}

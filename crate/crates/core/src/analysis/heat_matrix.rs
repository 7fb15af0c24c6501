//! Heat transfer matrices `q` with `Q = Σ q_ij M_i†M_j` and their widening.

use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{HtoError, Result};
use crate::io::MatrixJson;
use crate::linalg::{self, c, max_abs, Mat, ZERO};
use crate::operator::{j_of_spectrum, HermitianOperator};

/// Relative singular-value cutoff of the least-squares solve.
const SOLVE_RCOND: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct HeatTransferMatrix {
    pub n: usize,
    /// Hermitian `n × n` matrix in energy units.
    pub q: Mat,
    pub residual: f64,
    /// False when `{M_i†M_j}` is dependent and `q` is only the minimum-norm solution.
    pub unique: bool,
}

impl HeatTransferMatrix {
    /// `Σ q_ij M_i†M_j`.
    pub fn reconstruct(&self, channel: &KrausChannel) -> Mat {
        reconstruct(&self.q, channel)
    }
}

pub fn reconstruct(q: &Mat, channel: &KrausChannel) -> Mat {
    let ops = channel.ops();
    let d = channel.dim_in();
    let mut out = Mat::zeros(d, d);
    for (i, mi) in ops.iter().enumerate() {
        for (j, mj) in ops.iter().enumerate() {
            if q[(i, j)] != ZERO {
                out += mi.adjoint() * mj * q[(i, j)];
            }
        }
    }
    out
}

/// Residual threshold for a given operator norm.
pub fn residual_threshold(q_norm: f64) -> f64 {
    1e-9 * q_norm + 1e-14
}

/// Solves `Q = Σ q_ij M_i†M_j` by minimum-norm least squares. A residual above
/// threshold certifies that `Q` is not an HTO of the channel.
pub fn extract_heat_matrix(q_op: &HermitianOperator, channel: &KrausChannel) -> Result<HeatTransferMatrix> {
    if !channel.is_minimal() {
        return Err(HtoError::Contract("heat matrix extraction needs a minimal Kraus set".into()));
    }
    if q_op.dim() != channel.dim_in() {
        return Err(HtoError::Shape("Q and the channel input differ in dimension".into()));
    }
    let n = channel.n();
    let ops = channel.ops();
    let mut cols = Vec::with_capacity(n * n);
    for mi in ops {
        for mj in ops {
            cols.push(linalg::vectorize(&(mi.adjoint() * mj)));
        }
    }
    let a = Mat::from_columns(&cols);
    let b = linalg::vectorize(q_op.matrix());
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(&b, SOLVE_RCOND * top.max(f64::MIN_POSITIVE))
        .map_err(|e| HtoError::Numeric(format!("least-squares solve failed: {e}")))?;
    let raw = Mat::from_fn(n, n, |i, j| x[i * n + j]);
    let q = linalg::symmetrize(&raw);
    let residual = max_abs(&(reconstruct(&q, channel) - q_op.matrix()));
    let threshold = residual_threshold(max_abs(q_op.matrix()));
    if residual > threshold {
        return Err(HtoError::NotInSpan { residual, threshold });
    }
    let unique = channel.is_extremal()?.extremal;
    Ok(HeatTransferMatrix { n, q, residual, unique })
}

/// `tr e^{−βq}` evaluated on the spectrum.
pub fn szilard_trace(q: &Mat, beta: f64) -> f64 {
    let vals = linalg::eigh(q).0;
    let scaled: Vec<f64> = vals.iter().map(|v| beta * v).collect();
    (-j_of_spectrum(&scaled)).exp()
}

/// Evidence that a heat matrix is admissible for an extremal channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeatCertificate {
    /// `tr e^{−βq} < 1` holds directly.
    TraceTest { q: MatrixJson, trace: f64 },
    /// `q + s = (1/t)(q + ts) + ((t−1)/t) q` with both components certified.
    Widened {
        t: f64,
        s: MatrixJson,
        shifted: Box<HeatCertificate>,
        base: Box<HeatCertificate>,
    },
}

impl HeatCertificate {
    /// Certifies `q` by the trace test.
    pub fn trace_test(q: &Mat, beta: f64) -> Result<Self> {
        let trace = szilard_trace(q, beta);
        if !(trace < 1.0) {
            return Err(HtoError::Inadmissible {
                reason: format!("tr e^{{−βq}} = {trace:.17e} is not below 1"),
                j: -trace.ln(),
            });
        }
        Ok(HeatCertificate::TraceTest {
            q: MatrixJson::from_matrix(q),
            trace,
        })
    }

    /// The heat matrix this certificate vouches for.
    pub fn matrix(&self) -> Result<Mat> {
        match self {
            HeatCertificate::TraceTest { q, .. } => q.to_matrix(),
            HeatCertificate::Widened { s, base, .. } => Ok(base.matrix()? + s.to_matrix()?),
        }
    }

    /// Re-evaluates every component and the convex combination.
    pub fn verify(&self, beta: f64) -> bool {
        match self {
            HeatCertificate::TraceTest { q, trace } => match q.to_matrix() {
                Ok(m) => {
                    let again = szilard_trace(&m, beta);
                    again < 1.0 && (again - trace).abs() <= 1e-12 * trace.max(1.0)
                }
                Err(_) => false,
            },
            HeatCertificate::Widened { t, s, shifted, base } => {
                if !(t.is_finite() && *t >= 1.0) || !shifted.verify(beta) || !base.verify(beta) {
                    return false;
                }
                let (Ok(sm), Ok(qs), Ok(qb)) = (s.to_matrix(), shifted.matrix(), base.matrix()) else {
                    return false;
                };
                if linalg::eigh(&sm).0[0] <= 1e-10 {
                    return false;
                }
                let expected_shift = &qb + &sm * c(*t);
                let combo = &qs * c(1.0 / t) + &qb * c((t - 1.0) / t);
                max_abs(&(qs - expected_shift)) <= 1e-10 * t.max(1.0)
                    && max_abs(&(combo - (&qb + &sm))) <= 1e-10
            }
        }
    }
}

/// Widens an admissible heat matrix by a positive-definite `s`.
pub fn widen_heat_matrix(base: &HeatCertificate, s: &Mat, beta: f64) -> Result<HeatCertificate> {
    let q = base.matrix()?;
    if s.shape() != q.shape() {
        return Err(HtoError::Shape("s and q differ in shape".into()));
    }
    let defect = linalg::hermiticity_defect(s);
    if defect > 1e-10 {
        return Err(HtoError::invariant("s hermitian", defect, 1e-10));
    }
    let s = linalg::symmetrize(s);
    let min_eig = linalg::eigh(&s).0[0];
    if min_eig <= 1e-10 {
        return Err(HtoError::Contract(format!(
            "widening needs s ≻ 0, smallest eigenvalue is {min_eig:.3e}"
        )));
    }
    let mut t = 1.0;
    for _ in 0..200 {
        let shifted = &q + &s * c(t);
        if let Ok(cert) = HeatCertificate::trace_test(&shifted, beta) {
            return Ok(HeatCertificate::Widened {
                t,
                s: MatrixJson::from_matrix(&s),
                shifted: Box::new(cert),
                base: Box::new(base.clone()),
            });
        }
        t *= 2.0;
    }
    Err(HtoError::Numeric("no finite widening parameter found".into()))
}

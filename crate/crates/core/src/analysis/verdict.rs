//! Admissibility decisions with re-checkable certificates.

use serde::{Deserialize, Serialize};

use super::heat_matrix::{extract_heat_matrix, reconstruct, residual_threshold, szilard_trace, HeatCertificate};
use super::lep::{LepReport, LEP_TOL};
use crate::channel::KrausChannel;
use crate::error::{HtoError, Result};
use crate::io::MatrixJson;
use crate::linalg::max_abs;
use crate::operator::{j_function, minimizer_sigma, von_neumann_entropy, DensityMatrix, HermitianOperator, Units};

/// Band around `J + S = 0` treated as the equality case.
pub const GAP_TOL: f64 = 1e-10;
/// Sorted-spectrum agreement required for isospectrality.
pub const ISOSPECTRAL_TOL: f64 = 1e-8;
/// Slack on `α ≥ 0` for single-Kraus channels.
pub const IDENTITY_COEFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    Inadmissible,
    BoundaryCase,
}

impl Verdict {
    pub fn is_admissible(self) -> bool {
        !matches!(self, Verdict::Inadmissible)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `J(βQ) + S(ρ_0)` away from zero.
    Gap { j: f64, entropy: f64, gap: f64 },
    /// Equality case: sorted spectra of `σ_{βQ}` and `ρ_0` compared.
    Isospectral {
        j: f64,
        entropy: f64,
        gap: f64,
        max_spectrum_deviation: f64,
    },
    /// `tr e^{−βq}` of the extracted heat transfer matrix.
    TraceTest { q: MatrixJson, trace: f64, margin: f64, j: f64 },
    /// Single-Kraus channel with `Q = α1`.
    IdentityCoefficient { alpha: f64, residual: f64 },
    /// `Q` lies outside `span{M_i†M_j}`.
    NotInSpan { residual: f64, threshold: f64 },
    /// Minimum of the entropic slack with its minimizer.
    Lep { min_value: f64, argmin: MatrixJson },
    /// Convex-combination certificate from widening.
    Widened { certificate: HeatCertificate },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub verdict: Verdict,
    pub certificate: Certificate,
}

impl AdmissibilityVerdict {
    /// Checks that the recorded numbers support the verdict. Certificates
    /// carrying matrices are re-evaluated.
    pub fn is_consistent(&self, beta: f64) -> bool {
        use Certificate::*;
        let v = self.verdict;
        match &self.certificate {
            Gap { j, entropy, gap } => {
                (j + entropy - gap).abs() <= 1e-12 * (1.0 + gap.abs())
                    && match v {
                        Verdict::Admissible => *gap > GAP_TOL,
                        Verdict::Inadmissible => *gap < -GAP_TOL,
                        Verdict::BoundaryCase => false,
                    }
            }
            Isospectral { gap, max_spectrum_deviation, .. } => {
                gap.abs() <= GAP_TOL
                    && match v {
                        Verdict::BoundaryCase => *max_spectrum_deviation <= ISOSPECTRAL_TOL,
                        Verdict::Inadmissible => *max_spectrum_deviation > ISOSPECTRAL_TOL,
                        Verdict::Admissible => false,
                    }
            }
            TraceTest { q, trace, .. } => match q.to_matrix() {
                Ok(m) => {
                    let again = szilard_trace(&m, beta);
                    (again - trace).abs() <= 1e-12 * trace.max(1.0) && (again < 1.0) == (v == Verdict::Admissible)
                }
                Err(_) => false,
            },
            IdentityCoefficient { alpha, .. } => (*alpha >= -IDENTITY_COEFF_TOL) == (v == Verdict::Admissible),
            NotInSpan { residual, threshold } => v == Verdict::Inadmissible && residual > threshold,
            Lep { min_value, .. } => (*min_value >= -LEP_TOL) == (v == Verdict::Admissible),
            Widened { certificate } => v == Verdict::Admissible && certificate.verify(beta),
        }
    }
}

/// Wraps an entropic-bound search as a verdict.
pub fn lep_verdict(report: &LepReport) -> AdmissibilityVerdict {
    AdmissibilityVerdict {
        verdict: if report.admissible {
            Verdict::Admissible
        } else {
            Verdict::Inadmissible
        },
        certificate: Certificate::Lep {
            min_value: report.min_value,
            argmin: MatrixJson::from_matrix(&report.argmin),
        },
    }
}

/// Decides whether `Q` is the HTO of some realization of the complete erasure to `ρ_0`.
pub fn decide_complete_erasure_hto(q: &HermitianOperator, beta: f64, rho0: &DensityMatrix) -> Result<AdmissibilityVerdict> {
    if q.dim() != rho0.dim() {
        return Err(HtoError::Shape("Q and ρ_0 live on different spaces".into()));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(HtoError::Contract(format!("β must be finite and positive, got {beta}")));
    }
    let bq = q.scaled(beta, Units::Dimensionless);
    let j = j_function(&bq);
    let entropy = von_neumann_entropy(rho0);
    let gap = j + entropy;
    if gap > GAP_TOL {
        return Ok(AdmissibilityVerdict {
            verdict: Verdict::Admissible,
            certificate: Certificate::Gap { j, entropy, gap },
        });
    }
    if gap < -GAP_TOL {
        return Ok(AdmissibilityVerdict {
            verdict: Verdict::Inadmissible,
            certificate: Certificate::Gap { j, entropy, gap },
        });
    }
    let sigma = minimizer_sigma(&bq).eigenvalues();
    let target = rho0.eigenvalues();
    let max_spectrum_deviation = sigma
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(AdmissibilityVerdict {
        verdict: if max_spectrum_deviation <= ISOSPECTRAL_TOL {
            Verdict::BoundaryCase
        } else {
            Verdict::Inadmissible
        },
        certificate: Certificate::Isospectral {
            j,
            entropy,
            gap,
            max_spectrum_deviation,
        },
    })
}

/// Decides whether `Q` is an HTO of an extremal channel given by a minimal Kraus set.
pub fn decide_extremal_hto(q_op: &HermitianOperator, channel: &KrausChannel, beta: f64) -> Result<AdmissibilityVerdict> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(HtoError::Contract(format!("β must be finite and positive, got {beta}")));
    }
    if !channel.is_minimal() {
        return Err(HtoError::Contract("decision needs a minimal Kraus set".into()));
    }
    if !channel.is_extremal()?.extremal {
        return Err(HtoError::Unsupported(
            "for non-extremal channels the trace condition is sufficient but not necessary".into(),
        ));
    }
    let h = match extract_heat_matrix(q_op, channel) {
        Ok(h) => h,
        Err(HtoError::NotInSpan { residual, threshold }) => {
            return Ok(AdmissibilityVerdict {
                verdict: Verdict::Inadmissible,
                certificate: Certificate::NotInSpan { residual, threshold },
            })
        }
        Err(e) => return Err(e),
    };
    if h.n == 1 {
        let alpha = h.q[(0, 0)].re;
        return Ok(AdmissibilityVerdict {
            verdict: if alpha >= -IDENTITY_COEFF_TOL {
                Verdict::Admissible
            } else {
                Verdict::Inadmissible
            },
            certificate: Certificate::IdentityCoefficient {
                alpha,
                residual: h.residual,
            },
        });
    }
    let trace = szilard_trace(&h.q, beta);
    Ok(AdmissibilityVerdict {
        verdict: if trace < 1.0 {
            Verdict::Admissible
        } else {
            Verdict::Inadmissible
        },
        certificate: Certificate::TraceTest {
            q: MatrixJson::from_matrix(&h.q),
            trace,
            margin: 1.0 - trace,
            j: -trace.ln(),
        },
    })
}

/// Accepts `Q` on the strength of a heat certificate, after checking the
/// certificate and that its matrix reproduces `Q` through the Kraus set.
pub fn decide_via_certificate(
    q_op: &HermitianOperator,
    channel: &KrausChannel,
    beta: f64,
    certificate: &HeatCertificate,
) -> Result<AdmissibilityVerdict> {
    if !certificate.verify(beta) {
        return Err(HtoError::Consistency {
            what: "heat certificate does not re-verify".into(),
            deviation: f64::NAN,
        });
    }
    let q = certificate.matrix()?;
    if q.nrows() != channel.n() {
        return Err(HtoError::Shape("certificate size differs from the Kraus count".into()));
    }
    let residual = max_abs(&(reconstruct(&q, channel) - q_op.matrix()));
    let threshold = residual_threshold(max_abs(q_op.matrix()));
    if residual > threshold {
        return Ok(AdmissibilityVerdict {
            verdict: Verdict::Inadmissible,
            certificate: Certificate::NotInSpan { residual, threshold },
        });
    }
    Ok(AdmissibilityVerdict {
        verdict: Verdict::Admissible,
        certificate: Certificate::Widened {
            certificate: certificate.clone(),
        },
    })
}

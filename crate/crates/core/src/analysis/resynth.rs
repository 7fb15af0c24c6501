//! Realizations of extremal channels with a prescribed heat transfer matrix.
//!
//! A Landauer chain `W` on an auxiliary `n`-level register `R` with HTO `q` is
//! lifted to `U = Σ_i M_i ⊗ L_i` with `L_i = Σ_k (⟨k|_R ⊗ 1) W (|i⟩_R ⊗ 1) ⊗ |k⟩_K`.
//! The final content of `R` is kept in an extra output register `K` with zero
//! Hamiltonian, so the induced channel is exact and `HTO(U) = Σ q̂_ij M_i†M_j`
//! with `q̂` the HTO of `W`.

use nalgebra::DVector;

use super::heat_matrix::{extract_heat_matrix, reconstruct};
use super::verdict::{decide_extremal_hto, Certificate, Verdict};
use crate::channel::{channel_distance, KrausChannel};
use crate::error::{HtoError, Result};
use crate::linalg::{max_abs, Mat, MAX_MATRIX_ENTRIES, ONE, ZERO};
use crate::operator::{HermitianOperator, Isometry, Units};
use crate::realization::{add_heat_rider, compute_hto, DenseRealization};
use crate::synthesis::{synthesize_landauer, to_dense, ChainRealization, SynthesisOptions};

/// Tail bound used when the chain is materialized; the lifted channel is exact regardless.
const DENSE_TAIL: f64 = 0.5;
/// Tail bound of the structured fallback.
const STRUCTURED_TAIL: f64 = 1e-8;
const STRUCTURED_START_N: usize = 30;
const MAX_CHAIN_N: usize = 4096;

#[derive(Debug, Clone)]
pub struct ExtremalResynthesis {
    /// Heat transfer matrix the realization was built for.
    pub q: Mat,
    /// Landauer chain on `R`; absent for single-Kraus channels.
    pub chain: Option<ChainRealization>,
    /// Materialized realization when it fits in memory.
    pub dense: Option<DenseRealization>,
    /// HTO of the lifted realization.
    pub hto: HermitianOperator,
    /// `‖HTO − Q‖_max`.
    pub deviation: f64,
    /// Probe distance between the induced and the given channel (dense only).
    pub channel_distance: Option<f64>,
}

/// Builds a realization of `channel` whose HTO is `Q`, after deciding that `Q` is admissible.
pub fn resynthesize_extremal(
    q_op: &HermitianOperator,
    channel: &KrausChannel,
    beta: f64,
) -> Result<ExtremalResynthesis> {
    if channel.dim_in() != channel.dim_out() {
        return Err(HtoError::Contract("lifting needs a channel with equal input and output".into()));
    }
    let verdict = decide_extremal_hto(q_op, channel, beta)?;
    if verdict.verdict != Verdict::Admissible {
        let j = match verdict.certificate {
            Certificate::TraceTest { j, .. } => j,
            Certificate::IdentityCoefficient { alpha, .. } => beta * alpha,
            _ => f64::NAN,
        };
        return Err(HtoError::Inadmissible {
            reason: "the heat transfer matrix fails the extremal-channel test".into(),
            j,
        });
    }
    let h = extract_heat_matrix(q_op, channel)?;
    if h.n == 1 {
        return single_kraus(q_op, channel, beta, h.q);
    }
    let q_r = HermitianOperator::energy(h.q.clone())?;
    let mut psi0 = DVector::from_element(h.n, ZERO);
    psi0[0] = ONE;

    let d = channel.dim_in();
    let mut n_sites = 2;
    while let Some(entries) = lifted_entries(d, h.n, n_sites) {
        if entries > MAX_MATRIX_ENTRIES {
            break;
        }
        match synthesize_landauer(&q_r, beta, &psi0, n_sites, DENSE_TAIL, SynthesisOptions::default()) {
            Ok(chain) => return dense_lift(q_op, channel, h.q, chain),
            Err(HtoError::BracketFailure { .. }) => n_sites += 1,
            Err(e) => return Err(e),
        }
    }

    let mut n_sites = STRUCTURED_START_N;
    loop {
        match synthesize_landauer(&q_r, beta, &psi0, n_sites, STRUCTURED_TAIL, SynthesisOptions::default()) {
            Ok(chain) => {
                let hto = HermitianOperator::energy(reconstruct(chain.achieved_hto().matrix(), channel))?;
                let deviation = max_abs(&(hto.matrix() - q_op.matrix()));
                return Ok(ExtremalResynthesis {
                    q: h.q,
                    chain: Some(chain),
                    dense: None,
                    hto,
                    deviation,
                    channel_distance: None,
                });
            }
            Err(HtoError::BracketFailure { suggested_n, .. }) if suggested_n <= MAX_CHAIN_N => {
                n_sites = suggested_n.max(n_sites + 1);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Entry count of the lifted isometry, `(d·n^N·n) × (d·n^N)`.
fn lifted_entries(d: usize, n: usize, sites: usize) -> Option<usize> {
    let db = n.checked_pow(sites as u32)?;
    let cols = d.checked_mul(db)?;
    cols.checked_mul(n)?.checked_mul(cols)
}

fn dense_lift(
    q_op: &HermitianOperator,
    channel: &KrausChannel,
    q: Mat,
    chain: ChainRealization,
) -> Result<ExtremalResynthesis> {
    let w_real = to_dense(&chain)?;
    let w = w_real.isometry().matrix();
    let n = chain.dim_a();
    let db = w_real.dim_b();
    let d = channel.dim_in();
    let ops = channel.ops();
    let rows = d * db * n;
    let mut u = Mat::from_element(rows, d * db, ZERO);
    for (i, m) in ops.iter().enumerate() {
        for a_out in 0..d {
            for a in 0..d {
                let coeff = m[(a_out, a)];
                if coeff == ZERO {
                    continue;
                }
                for b in 0..db {
                    let col = a * db + b;
                    for k in 0..n {
                        for b_out in 0..db {
                            let wv = w[(k * db + b_out, i * db + b)];
                            if wv != ZERO {
                                u[(a_out * db * n + b_out * n + k, col)] += coeff * wv;
                            }
                        }
                    }
                }
            }
        }
    }
    let bath_h = w_real.bath_h().clone();
    let bath_h_out = bath_h.local_sum(&HermitianOperator::zero(n, Units::Energy))?;
    let dense = DenseRealization::with_output_bath(d, bath_h, bath_h_out, chain.beta(), Isometry::new(u)?)?;
    let report = compute_hto(&dense)?;
    let deviation = max_abs(&(report.hto.matrix() - q_op.matrix()));
    let distance = channel_distance(&report.channel, channel)?;
    Ok(ExtremalResynthesis {
        q,
        chain: Some(chain),
        dense: Some(dense),
        hto: report.hto,
        deviation,
        channel_distance: Some(distance),
    })
}

/// `U = M ⊗ 1` on a one-level bath, plus a rider carrying `α`.
fn single_kraus(q_op: &HermitianOperator, channel: &KrausChannel, beta: f64, q: Mat) -> Result<ExtremalResynthesis> {
    let alpha = q[(0, 0)].re.max(0.0);
    let bath = HermitianOperator::zero(1, Units::Energy);
    let base = DenseRealization::new(channel.dim_in(), bath, beta, Isometry::new(channel.ops()[0].clone())?)?;
    let dense = if alpha > 0.0 { add_heat_rider(&base, alpha)? } else { base };
    let report = compute_hto(&dense)?;
    let deviation = max_abs(&(report.hto.matrix() - q_op.matrix()));
    let distance = channel_distance(&report.channel, channel)?;
    Ok(ExtremalResynthesis {
        q,
        chain: None,
        dense: Some(dense),
        hto: report.hto,
        deviation,
        channel_distance: Some(distance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::unit_matrix;
    use crate::linalg::{self, diag};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn e_t_lift_matches_heat_matrix() {
        let beta = 1.0;
        let ch = KrausChannel::e_t(&unit_matrix(2, 0, 1), 0.5).unwrap();
        let q = diag(&[1.2, 0.9]);
        let q_op = HermitianOperator::energy(reconstruct(&q, &ch)).unwrap();
        let r = resynthesize_extremal(&q_op, &ch, beta).unwrap();
        assert!(r.dense.is_some());
        assert!(r.deviation < 1e-6, "{}", r.deviation);
        assert!(r.channel_distance.unwrap() < 1e-9);
    }

    #[test]
    fn off_diagonal_heat_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let ch = KrausChannel::e_t(&unit_matrix(2, 0, 1), 0.7).unwrap();
        let mut q = random::random_hermitian(&mut rng, 2, 0.3);
        q += linalg::identity(2) * linalg::c(1.5);
        let q_op = HermitianOperator::energy(reconstruct(&q, &ch)).unwrap();
        let r = resynthesize_extremal(&q_op, &ch, 1.0).unwrap();
        assert!(r.deviation < 1e-6, "{}", r.deviation);
    }

    #[test]
    fn unitary_lift_with_rider() {
        let u = KrausChannel::unitary(linalg::pauli_x()).unwrap();
        let q = HermitianOperator::scaled_identity(2, 0.4, Units::Energy);
        let r = resynthesize_extremal(&q, &u, 1.0).unwrap();
        assert!(r.deviation < 1e-10);
        let zero = HermitianOperator::zero(2, Units::Energy);
        assert!(resynthesize_extremal(&zero, &u, 1.0).unwrap().deviation < 1e-12);
    }

    #[test]
    fn inadmissible_is_refused() {
        let ch = KrausChannel::e_t(&unit_matrix(2, 0, 1), 0.5).unwrap();
        let q_op = HermitianOperator::energy(reconstruct(&diag(&[0.5, 0.5]), &ch)).unwrap();
        assert!(matches!(resynthesize_extremal(&q_op, &ch, 1.0), Err(HtoError::Inadmissible { .. })));
    }
}

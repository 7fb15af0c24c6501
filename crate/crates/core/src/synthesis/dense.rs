//! Brute-force materialization of a chain, used to validate the structured path.

use rand::Rng;

use super::chain::{closure, ChainRealization};
use crate::channel::channel_distance;
use crate::error::{HtoError, Result};
use crate::linalg::{max_abs, Mat, MAX_MATRIX_ENTRIES, ZERO};
use crate::operator::{HermitianOperator, Isometry, Units};
use crate::random;
use crate::realization::{add_heat_rider, average_heat, compute_hto, DenseRealization};

/// Largest joint dimension whose square matrices fit under the entry cap.
pub fn max_joint_dim() -> usize {
    (MAX_MATRIX_ENTRIES as f64).sqrt() as usize
}

/// Site dimensions in bath order `Y_1..Y_M, X_1..X_N`.
fn bath_dims(chain: &ChainRealization) -> Vec<usize> {
    let mut dims = vec![chain.rank(); chain.m()];
    dims.extend(std::iter::repeat_n(chain.dim_a(), chain.n()));
    dims
}

pub fn joint_dim(chain: &ChainRealization) -> Option<usize> {
    bath_dims(chain)
        .iter()
        .try_fold(chain.dim_a(), |acc, &d| acc.checked_mul(d))
}

/// Dense realization of the truncated chain: `V = (U_out ⊗ 1) P (U_Q† ⊗ 1)` with
/// `P` the shift-and-close permutation on computational indices.
pub fn to_dense(chain: &ChainRealization) -> Result<DenseRealization> {
    let d = chain.dim_a();
    let r = chain.rank();
    let (m, n) = (chain.m(), chain.n());
    let dims = bath_dims(chain);
    let total = joint_dim(chain)
        .filter(|&t| t <= max_joint_dim())
        .ok_or_else(|| {
            HtoError::Resource(format!(
                "chain with d = {d}, r = {r}, M = {m}, N = {n} exceeds the dense joint dimension {}",
                max_joint_dim()
            ))
        })?;
    let db = total / d;

    let (ys, xs) = chain.site_energies();
    let mut levels = vec![0.0; db];
    let mut digits = vec![0usize; dims.len()];
    for (b, level) in levels.iter_mut().enumerate() {
        unpack(b, &dims, &mut digits);
        let mut e = 0.0;
        for (k, &j) in digits[..m].iter().enumerate() {
            e += ys[k][j];
        }
        for (k, &i) in digits[m..].iter().enumerate() {
            e += xs[k][i];
        }
        *level = e;
    }
    if levels.iter().any(|e| !e.is_finite()) {
        return Err(HtoError::Numeric("chain energies overflow at this scale".into()));
    }
    let bath_h = HermitianOperator::from_diagonal(&levels, Units::Energy)?;

    let uq = chain.q_basis();
    let uo = chain.out_basis();
    let mut v = Mat::from_element(total, total, ZERO);
    let mut out_digits = vec![0usize; dims.len()];
    for b in 0..db {
        unpack(b, &dims, &mut digits);
        for l in 0..d {
            // Shift: Y_k ← Y_{k+1}, X_1 ← ℓ, X_k ← X_{k−1}; close (j_1, i_N) → (a, y).
            let j1 = if m > 0 { digits[0] } else { 0 };
            let i_last = digits[m + n - 1];
            let (a, y) = closure(j1, i_last, r, d);
            if m > 0 {
                out_digits[..m - 1].copy_from_slice(&digits[1..m]);
                out_digits[m - 1] = y;
            }
            out_digits[m] = l;
            out_digits[m + 1..m + n].copy_from_slice(&digits[m..m + n - 1]);
            let b_out = pack(&out_digits, &dims);
            for x in 0..d {
                let coeff = uq[(x, l)].conj();
                if coeff == ZERO {
                    continue;
                }
                for o in 0..d {
                    v[(o * db + b_out, x * db + b)] += uo[(o, a)] * coeff;
                }
            }
        }
    }
    let dense = DenseRealization::new(d, bath_h, chain.beta(), Isometry::new(v)?)?;
    if chain.rider_heat() > 0.0 {
        add_heat_rider(&dense, chain.rider_heat())
    } else {
        Ok(dense)
    }
}

fn unpack(mut index: usize, dims: &[usize], digits: &mut [usize]) {
    for (slot, &dim) in digits.iter_mut().zip(dims).rev() {
        *slot = index % dim;
        index /= dim;
    }
}

fn pack(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &dim)| acc * dim + x)
}

/// Agreement between the dense and the structured descriptions of a chain.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OracleReport {
    pub joint_dim: usize,
    /// Largest `|dense tr ρQ − structured ΔE_B|` over the sampled inputs.
    pub heat_deviation: f64,
    /// `‖Q_dense − Q̂‖_max`.
    pub hto_deviation: f64,
    /// Probe distance between the dense induced channel and the ideal erasure.
    pub channel_distance: f64,
    /// `d · ε_tail`.
    pub channel_bound: f64,
}

impl OracleReport {
    pub fn passes(&self, heat_tol: f64) -> bool {
        self.heat_deviation <= heat_tol && self.channel_distance <= self.channel_bound + 1e-12
    }
}

/// Materializes the chain and compares heat and channel with the structured path.
pub fn dense_oracle_check<R: Rng + ?Sized>(
    chain: &ChainRealization,
    samples: usize,
    rng: &mut R,
) -> Result<OracleReport> {
    let dense = to_dense(chain)?;
    let report = compute_hto(&dense)?;
    let d = chain.dim_a();
    let mut heat_deviation: f64 = 0.0;
    for k in 0..samples.max(1) {
        let rho = random::random_state(rng, d, 1 + k % d);
        let dense_heat = average_heat(&report, &rho)?;
        let structured = chain.structured_heat_accounting(&rho)?;
        heat_deviation = heat_deviation.max((dense_heat - structured).abs());
    }
    let hto_deviation = max_abs(&(report.hto.matrix() - chain.achieved_hto().matrix()));
    Ok(OracleReport {
        joint_dim: dense.isometry().dim_in(),
        heat_deviation,
        hto_deviation,
        channel_distance: channel_distance(&report.channel, &chain.ideal_channel())?,
        channel_bound: d as f64 * chain.epsilon_tail(),
    })
}

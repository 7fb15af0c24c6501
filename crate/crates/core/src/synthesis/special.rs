//! The swap realization of the equality case and heat-minimizing erasure design.

use nalgebra::DVector;

use super::chain::{synthesize_landauer, ChainRealization, SynthesisOptions, RANK_TOL};
use crate::error::{HtoError, Result};
use crate::linalg::{self, c, max_abs, C64, Mat};
use crate::operator::{von_neumann_entropy, DensityMatrix, HermitianOperator, Isometry};
use crate::realization::DenseRealization;

/// Bath Hamiltonian `−(1/β) ln ρ_0` for a full-rank `ρ_0`.
fn log_hamiltonian(rho0: &DensityMatrix, beta: f64) -> Result<HermitianOperator> {
    let spec = rho0.spectral();
    if spec.eigenvalues[0] <= RANK_TOL {
        return Err(HtoError::Inadmissible {
            reason: "the swap construction needs a full-rank final state".into(),
            j: -von_neumann_entropy(rho0),
        });
    }
    let levels: Vec<f64> = spec.eigenvalues.iter().map(|p| -p.ln() / beta).collect();
    HermitianOperator::energy(linalg::from_spectrum(&levels, &spec.eigenvectors))
}

/// Rotate the device by `W`, then swap it with a bath copy prepared in `ρ_0`.
pub fn swap_equality_case(rho0: &DensityMatrix, w: &Mat, beta: f64) -> Result<DenseRealization> {
    let d = rho0.dim();
    if w.shape() != (d, d) {
        return Err(HtoError::Shape(format!("W must be {d}×{d}")));
    }
    let defect = max_abs(&(w.adjoint() * w - linalg::identity(d)));
    if defect > 1e-9 {
        return Err(HtoError::invariant("W unitary", defect, 1e-9));
    }
    let h_b = log_hamiltonian(rho0, beta)?;
    let v = linalg::swap_operator(d) * linalg::kron(w, &linalg::identity(d))?;
    DenseRealization::new(d, h_b, beta, Isometry::new(v)?)
}

/// Closed form `−(1/β) W†(ln ρ_0 + S(ρ_0)·1)W` of the swap realization's HTO.
pub fn swap_equality_hto(rho0: &DensityMatrix, w: &Mat, beta: f64) -> Result<HermitianOperator> {
    let h_b = log_hamiltonian(rho0, beta)?;
    let s = von_neumann_entropy(rho0);
    let inner = h_b.matrix() - linalg::identity(rho0.dim()) * c(s / beta);
    HermitianOperator::energy(w.adjoint() * inner * w)
}

/// `Q = −(1/β) ln ρ_avg + ε·1` and its Landauer realization to `|0⟩`.
pub fn design_min_heat_erasure(
    rho_avg: &DensityMatrix,
    beta: f64,
    epsilon: f64,
    n: usize,
    tail_bound: f64,
    opts: SynthesisOptions,
) -> Result<(HermitianOperator, ChainRealization)> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(HtoError::Inadmissible {
            reason: format!("a finite bath needs ε > 0, got {epsilon}"),
            j: beta * epsilon,
        });
    }
    if rho_avg.eigenvalues()[0] <= RANK_TOL {
        return Err(HtoError::Contract(
            "the average input state must be full rank; regularize it first".into(),
        ));
    }
    let q = log_hamiltonian(rho_avg, beta)?.shifted(epsilon);
    let mut psi0 = DVector::<C64>::zeros(rho_avg.dim());
    psi0[0] = c(1.0);
    let chain = synthesize_landauer(&q, beta, &psi0, n, tail_bound, opts)?;
    Ok((q, chain))
}

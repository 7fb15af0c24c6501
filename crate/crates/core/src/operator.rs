//! Hermitian operators, density matrices, isometries and the entropy toolbox.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{HtoError, Result};
use crate::linalg::{self, c, eigh, from_spectrum, max_abs, C64, Mat, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const ISOMETRY_TOL: f64 = 1e-9;
/// Eigenvalues below this contribute nothing to entropies (`0 ln 0 = 0`).
pub const ENTROPY_FLOOR: f64 = 1e-14;
/// Weight on the kernel of the second argument that makes a relative entropy infinite.
pub const SUPPORT_WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Energy,
    Dimensionless,
}

/// A hermitian matrix with a units tag. Entries are symmetrized on construction.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: Mat,
    units: Units,
    subsystems: Vec<usize>,
}

impl HermitianOperator {
    pub fn new(matrix: Mat, units: Units) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(HtoError::Shape(format!(
                "hermitian operator must be square and non-empty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(HtoError::invariant("hermiticity", defect, HERMITIAN_TOL));
        }
        let dim = matrix.nrows();
        Ok(Self {
            matrix: linalg::symmetrize(&matrix),
            units,
            subsystems: vec![dim],
        })
    }

    pub fn energy(matrix: Mat) -> Result<Self> {
        Self::new(matrix, Units::Energy)
    }

    pub fn dimensionless(matrix: Mat) -> Result<Self> {
        Self::new(matrix, Units::Dimensionless)
    }

    pub fn from_diagonal(values: &[f64], units: Units) -> Result<Self> {
        Self::new(linalg::diag(values), units)
    }

    pub fn zero(dim: usize, units: Units) -> Self {
        Self {
            matrix: Mat::zeros(dim, dim),
            units,
            subsystems: vec![dim],
        }
    }

    pub fn scaled_identity(dim: usize, alpha: f64, units: Units) -> Self {
        Self {
            matrix: linalg::identity(dim) * c(alpha),
            units,
            subsystems: vec![dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    /// Subsystem dimensions, left to right.
    pub fn subsystems(&self) -> &[usize] {
        &self.subsystems
    }

    /// `β·H` as a dimensionless operator.
    pub fn scaled(&self, factor: f64, units: Units) -> Self {
        Self {
            matrix: &self.matrix * c(factor),
            units,
            subsystems: self.subsystems.clone(),
        }
    }

    pub fn shifted(&self, alpha: f64) -> Self {
        Self {
            matrix: &self.matrix + linalg::identity(self.dim()) * c(alpha),
            units: self.units,
            subsystems: self.subsystems.clone(),
        }
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        SpectralDecomposition::of(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).0
    }

    /// `tr(ρ H)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        linalg::trace_product(rho.matrix(), &self.matrix).re
    }

    /// Kronecker product; both factors must carry the same units.
    pub fn tensor(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.units != other.units {
            return Err(HtoError::Contract(
                "tensor product of operators with different units".into(),
            ));
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend_from_slice(&other.subsystems);
        Ok(Self {
            matrix: linalg::kron(&self.matrix, &other.matrix)?,
            units: self.units,
            subsystems,
        })
    }

    /// Additive lift `H ⊗ 1 + 1 ⊗ K` of two local Hamiltonians.
    pub fn local_sum(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.units != other.units {
            return Err(HtoError::Contract("local sum of operators with different units".into()));
        }
        let left = linalg::kron(&self.matrix, &linalg::identity(other.dim()))?;
        let right = linalg::kron(&linalg::identity(self.dim()), &other.matrix)?;
        let mut subsystems = self.subsystems.clone();
        subsystems.extend_from_slice(&other.subsystems);
        Ok(Self {
            matrix: left + right,
            units: self.units,
            subsystems,
        })
    }

    pub fn approx_eq(&self, other: &HermitianOperator, tol: f64) -> bool {
        self.dim() == other.dim() && max_abs(&(&self.matrix - &other.matrix)) <= tol
    }
}

/// A positive semidefinite unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: Mat,
    subsystems: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: Mat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(HtoError::Shape(format!(
                "density matrix must be square and non-empty, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(HtoError::invariant("state hermiticity", defect, HERMITIAN_TOL));
        }
        let m = linalg::symmetrize(&matrix);
        let tr = linalg::trace_re(&m);
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(HtoError::invariant("unit trace", (tr - 1.0).abs(), TRACE_TOL));
        }
        let min_eig = eigh(&m).0[0];
        if min_eig < -PSD_TOL {
            return Err(HtoError::invariant("positivity", -min_eig, PSD_TOL));
        }
        let dim = m.nrows();
        Ok(Self {
            matrix: m,
            subsystems: vec![dim],
        })
    }

    /// Normalizes the trace first; fails when the trace is off by more than `tol`.
    pub fn renormalized(matrix: Mat, tol: f64) -> Result<Self> {
        let tr = linalg::trace_re(&matrix);
        if (tr - 1.0).abs() > tol {
            return Err(HtoError::invariant("unit trace", (tr - 1.0).abs(), tol));
        }
        Self::new(matrix / c(tr))
    }

    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(HtoError::Contract("zero state vector".into()));
        }
        let v = psi / c(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = Mat::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self {
            matrix: m,
            subsystems: vec![dim],
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim) * c(1.0 / dim as f64),
            subsystems: vec![dim],
        }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(probs))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn subsystems(&self) -> &[usize] {
        &self.subsystems
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).0
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        SpectralDecomposition::of(&self.matrix)
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend_from_slice(&other.subsystems);
        Ok(Self {
            matrix: linalg::kron(&self.matrix, &other.matrix)?,
            subsystems,
        })
    }

    /// Reduction onto the listed subsystems (indices into `dims`).
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, dims, keep)?;
        let kept: Vec<usize> = {
            let mut k = keep.to_vec();
            k.sort_unstable();
            k.dedup();
            k.iter().map(|&i| dims[i]).collect()
        };
        Ok(Self {
            matrix: linalg::symmetrize(&m),
            subsystems: if kept.is_empty() { vec![1] } else { kept },
        })
    }

    /// `U ρ U†`; `u` must be unitary.
    pub fn conjugate(&self, u: &Mat) -> Result<DensityMatrix> {
        Self::new(u * &self.matrix * u.adjoint())
    }

    pub fn with_subsystems(mut self, dims: &[usize]) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() {
            return Err(HtoError::Shape("subsystem dims do not multiply to the state dim".into()));
        }
        self.subsystems = dims.to_vec();
        Ok(self)
    }
}

/// A linear map `V` with `V†V = 1`.
#[derive(Debug, Clone)]
pub struct Isometry {
    matrix: Mat,
}

impl Isometry {
    pub fn new(matrix: Mat) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if cols == 0 || rows < cols {
            return Err(HtoError::Shape(format!(
                "isometry needs dim_out ≥ dim_in ≥ 1, got {rows}×{cols}"
            )));
        }
        linalg::check_dim(rows, cols)?;
        let defect = max_abs(&(matrix.adjoint() * &matrix - linalg::identity(cols)));
        if defect > ISOMETRY_TOL {
            return Err(HtoError::invariant("isometry V†V = 1", defect, ISOMETRY_TOL));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn tensor(&self, other: &Isometry) -> Result<Isometry> {
        Ok(Self {
            matrix: linalg::kron(&self.matrix, &other.matrix)?,
        })
    }
}

/// Eigenvalues in ascending order with the matching unitary of eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl SpectralDecomposition {
    pub fn of(m: &Mat) -> Self {
        let (eigenvalues, eigenvectors) = eigh(m);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn reconstruct(&self) -> Mat {
        from_spectrum(&self.eigenvalues, &self.eigenvectors)
    }
}

/// Kronecker product of two raw matrices with the dimension cap applied.
pub fn tensor(a: &Mat, b: &Mat) -> Result<Mat> {
    linalg::kron(a, b)
}

/// Partial trace of `m` over every subsystem not listed in `keep`.
pub fn partial_trace(m: &Mat, dims: &[usize], keep: &[usize]) -> Result<Mat> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(HtoError::Shape(format!(
            "subsystem dims {dims:?} multiply to {total}, matrix is {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(HtoError::Shape(format!("subsystem index {bad} out of range")));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept: Vec<usize> = (0..n).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let dk: usize = kept.iter().map(|&i| dims[i]).product();
    let dt: usize = traced.iter().map(|&i| dims[i]).product();

    // Offsets into the full index for every kept / traced multi-index.
    let offsets = |subs: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut lin| {
                let mut off = 0;
                for &s in subs.iter().rev() {
                    off += (lin % dims[s]) * strides[s];
                    lin /= dims[s];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept, dk);
    let traced_off = offsets(&traced, dt);

    let mut out = Mat::zeros(dk, dk);
    for (a, &ra) in kept_off.iter().enumerate() {
        for (b, &rb) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m[(ra + t, rb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&p| p > ENTROPY_FLOOR)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Entropy of a raw positive matrix (used on intermediate results).
pub fn entropy_of_matrix(m: &Mat) -> f64 {
    entropy_of_spectrum(&eigh(m).0)
}

/// Shannon entropy of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    entropy_of_spectrum(p)
}

/// `S(σ‖ρ) = tr σ(ln σ − ln ρ)`; `+∞` when σ has weight on the kernel of ρ.
pub fn relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(HtoError::Shape("relative entropy of states with different dims".into()));
    }
    let (rv, rvec) = eigh(rho.matrix());
    let mut kernel_weight = 0.0;
    let mut cross = 0.0;
    for (k, &lam) in rv.iter().enumerate() {
        let col = rvec.column(k);
        let w = (col.adjoint() * sigma.matrix() * col)[(0, 0)].re;
        if lam <= ENTROPY_FLOOR {
            kernel_weight += w.max(0.0);
        } else {
            cross += w * lam.ln();
        }
    }
    if kernel_weight > SUPPORT_WEIGHT_TOL {
        return Ok(f64::INFINITY);
    }
    let neg_entropy = -von_neumann_entropy(sigma);
    Ok((neg_entropy - cross).max(0.0))
}

/// Relative entropy of two probability vectors (commuting states).
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return f64::INFINITY;
        }
        acc += a * (a.ln() - b.ln());
    }
    acc.max(0.0)
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(a: &Mat, b: &Mat) -> f64 {
    0.5 * linalg::trace_norm_hermitian(&linalg::symmetrize(&(a - b)))
}

/// `J(G) = −ln tr e^{−G}`, evaluated on the spectrum with log-sum-exp.
pub fn j_function(g: &HermitianOperator) -> f64 {
    -linalg::log_sum_exp_neg(&g.eigenvalues())
}

/// `J` of a matrix given directly by its spectrum.
pub fn j_of_spectrum(values: &[f64]) -> f64 {
    -linalg::log_sum_exp_neg(values)
}

/// Thermal state `e^{−βH}/Z` together with `ln Z`.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<(DensityMatrix, f64)> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(HtoError::Contract(format!("β must be finite and positive, got {beta}")));
    }
    if let Some(levels) = linalg::real_diagonal(h.matrix()) {
        let (probs, log_z) = boltzmann(&levels, beta);
        let rho = DensityMatrix {
            matrix: linalg::diag(&probs),
            subsystems: h.subsystems().to_vec(),
        };
        return Ok((rho, log_z));
    }
    let spec = h.spectral();
    let (probs, log_z) = boltzmann(&spec.eigenvalues, beta);
    let rho = DensityMatrix {
        matrix: linalg::symmetrize(&from_spectrum(&probs, &spec.eigenvectors)),
        subsystems: h.subsystems().to_vec(),
    };
    Ok((rho, log_z))
}

/// `S(σ‖ρ_β)` against the thermal state of `h`, with `ln ρ_β = −βH − ln Z`
/// taken from the spectrum so that weights below any floor stay exact.
pub fn relative_entropy_to_gibbs(sigma: &DensityMatrix, h: &HermitianOperator, beta: f64) -> Result<f64> {
    if sigma.dim() != h.dim() {
        return Err(HtoError::Shape("relative entropy of states with different dims".into()));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(HtoError::Contract(format!("β must be finite and positive, got {beta}")));
    }
    let spec = h.spectral();
    let (_, log_z) = boltzmann(&spec.eigenvalues, beta);
    let logs: Vec<f64> = spec.eigenvalues.iter().map(|&e| -beta * e - log_z).collect();
    let log_rho = from_spectrum(&logs, &spec.eigenvectors);
    let cross = linalg::trace_product(sigma.matrix(), &log_rho).re;
    Ok((-von_neumann_entropy(sigma) - cross).max(0.0))
}

/// Boltzmann weights of a list of levels: `(probabilities, ln Z)`.
pub fn boltzmann(levels: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let scaled: Vec<f64> = levels.iter().map(|&e| beta * e).collect();
    let log_z = linalg::log_sum_exp_neg(&scaled);
    (scaled.iter().map(|&x| (-x - log_z).exp()).collect(), log_z)
}

/// `σ_G = e^{J(G)} e^{−G}`, the minimizer of `tr ρG − S(ρ)`.
pub fn minimizer_sigma(g: &HermitianOperator) -> DensityMatrix {
    let spec = g.spectral();
    let j = j_of_spectrum(&spec.eigenvalues);
    let probs: Vec<f64> = spec.eigenvalues.iter().map(|&x| (j - x).exp()).collect();
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
    DensityMatrix {
        matrix: linalg::symmetrize(&from_spectrum(&probs, &spec.eigenvectors)),
        subsystems: vec![g.dim()],
    }
}

/// Matrix logarithm of a state, clamping eigenvalues at `floor`.
pub fn log_state(m: &Mat, floor: f64) -> Mat {
    linalg::hermitian_fn(m, |x| x.max(floor).ln())
}

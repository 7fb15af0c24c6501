//! Quantum channels in Kraus and Choi form.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{HtoError, Result};
use crate::linalg::{self, c, eigh, max_abs, C64, Mat, ONE, ZERO};
use crate::operator::{trace_distance, DensityMatrix};
use crate::random;

pub const TP_TOL: f64 = 1e-9;
/// Relative singular-value threshold for linear independence.
pub const INDEPENDENCE_TOL: f64 = 1e-9;
/// Relative eigenvalue threshold when reading Kraus operators off a Choi matrix.
pub const CHOI_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_PROBES: usize = 64;
const PROBE_SEED: u64 = 0x00C0_FFEE;

/// A trace-preserving completely positive map `ρ ↦ Σ M ρ M†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    ops: Vec<Mat>,
    minimal: bool,
}

impl KrausChannel {
    pub fn new(ops: Vec<Mat>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| HtoError::Shape("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(HtoError::Shape("Kraus operators must be non-empty".into()));
        }
        if ops.iter().any(|m| m.shape() != (dim_out, dim_in)) {
            return Err(HtoError::Shape("Kraus operators have mismatched shapes".into()));
        }
        let sum = ops
            .iter()
            .fold(Mat::zeros(dim_in, dim_in), |acc, m| acc + m.adjoint() * m);
        let defect = max_abs(&(sum - linalg::identity(dim_in)));
        if defect > TP_TOL {
            return Err(HtoError::invariant("trace preservation Σ M†M = 1", defect, TP_TOL));
        }
        let minimal = linearly_independent(&ops);
        Ok(Self {
            dim_in,
            dim_out,
            ops,
            minimal,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(linalg::identity(d)).expect("identity is unitary")
    }

    pub fn unitary(u: Mat) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(HtoError::Shape("unitary channel needs a square matrix".into()));
        }
        Self::new(vec![u])
    }

    /// Constant-output channel `ρ ↦ tr(ρ) ρ_0` with minimal Kraus set `√p_a |α_a⟩⟨i|`.
    pub fn complete_erasure(rho0: &DensityMatrix, dim_in: usize) -> Self {
        let spec = rho0.spectral();
        let d_out = rho0.dim();
        let mut ops = Vec::new();
        for (a, &p) in spec.eigenvalues.iter().enumerate().rev() {
            if p <= 1e-14 {
                continue;
            }
            let alpha = spec.eigenvectors.column(a);
            for i in 0..dim_in {
                let mut m = Mat::zeros(d_out, dim_in);
                for o in 0..d_out {
                    m[(o, i)] = alpha[o] * c(p.sqrt());
                }
                ops.push(m);
            }
        }
        Self::new(ops).expect("constant-output channels are trace preserving")
    }

    /// The family `M_1 = tX`, `M_2 = √(1 − t²X†X)`; `None`-like error when the root is not real.
    pub fn e_t(x: &Mat, t: f64) -> Result<Self> {
        let d = x.ncols();
        let gram = linalg::identity(d) - x.adjoint() * x * c(t * t);
        let (vals, _) = eigh(&gram);
        if vals[0] < -1e-12 {
            return Err(HtoError::Contract(format!(
                "1 − t²X†X is indefinite at t = {t} (smallest eigenvalue {:.3e})",
                vals[0]
            )));
        }
        let root = linalg::hermitian_fn(&gram, |v| v.max(0.0).sqrt());
        Self::new(vec![x * c(t), root])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn ops(&self) -> &[Mat] {
        &self.ops
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// Linear action on an arbitrary matrix.
    pub fn apply_matrix(&self, m: &Mat) -> Mat {
        self.ops
            .iter()
            .fold(Mat::zeros(self.dim_out, self.dim_out), |acc, k| acc + k * m * k.adjoint())
    }

    /// Heisenberg-picture dual `X ↦ Σ M† X M`.
    pub fn adjoint_apply(&self, x: &Mat) -> Mat {
        self.ops
            .iter()
            .fold(Mat::zeros(self.dim_in, self.dim_in), |acc, k| acc + k.adjoint() * x * k)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(HtoError::Shape(format!(
                "channel input dim {} does not match state dim {}",
                self.dim_in,
                rho.dim()
            )));
        }
        DensityMatrix::renormalized(self.apply_matrix(rho.matrix()), 1e-8)
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        let n = self.dim_in * self.dim_out;
        let mut m = Mat::zeros(n, n);
        for k in &self.ops {
            let v = choi_vector(k);
            m += &v * v.adjoint();
        }
        ChoiMatrix {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            matrix: linalg::symmetrize(&m),
        }
    }

    /// Equivalent channel with a minimal Kraus set.
    pub fn minimized(&self) -> Result<KrausChannel> {
        if self.minimal {
            return Ok(self.clone());
        }
        self.to_choi().to_kraus()
    }

    /// Linear-independence test of `{M_i†M_j}`.
    pub fn is_extremal(&self) -> Result<ExtremalityReport> {
        if !self.minimal {
            return Err(HtoError::Contract(
                "extremality needs a minimal Kraus representation".into(),
            ));
        }
        Ok(extremality(&self.ops))
    }

    /// `E ⊗ id` on an ancilla of dimension `k`.
    pub fn tensor_identity(&self, k: usize) -> Result<KrausChannel> {
        let id = linalg::identity(k);
        let ops = self
            .ops
            .iter()
            .map(|m| linalg::kron(m, &id))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(ops)
    }
}

/// Coefficients of `K` in the input-major Choi ordering `i·d_out + o`.
fn choi_vector(k: &Mat) -> DVector<C64> {
    let (d_out, d_in) = k.shape();
    DVector::from_fn(d_in * d_out, |idx, _| k[(idx % d_out, idx / d_out)])
}

fn stacked(vectors: &[DVector<C64>]) -> Mat {
    Mat::from_columns(vectors)
}

fn relative_rank_ok(m: &Mat) -> (bool, Vec<f64>) {
    let mut sv = linalg::singular_values(m);
    // A wide matrix has at least `cols − rows` vanishing singular values.
    sv.resize(m.ncols(), 0.0);
    let largest = sv.first().copied().unwrap_or(0.0);
    let smallest = sv.last().copied().unwrap_or(0.0);
    (largest > 0.0 && smallest > INDEPENDENCE_TOL * largest, sv)
}

fn linearly_independent(ops: &[Mat]) -> bool {
    let vs: Vec<_> = ops.iter().map(linalg::vectorize).collect();
    relative_rank_ok(&stacked(&vs)).0
}

/// Outcome of the extremality test.
#[derive(Debug, Clone)]
pub struct ExtremalityReport {
    pub extremal: bool,
    /// Smallest singular value divided by the largest.
    pub relative_margin: f64,
    pub singular_values: Vec<f64>,
    /// Coefficients `c_ij` with `Σ c_ij M_i†M_j ≈ 0` when not extremal.
    pub witness: Option<Mat>,
}

fn extremality(ops: &[Mat]) -> ExtremalityReport {
    let n = ops.len();
    let mut cols = Vec::with_capacity(n * n);
    for mi in ops {
        for mj in ops {
            cols.push(linalg::vectorize(&(mi.adjoint() * mj)));
        }
    }
    let a = stacked(&cols);
    let (extremal, sv) = relative_rank_ok(&a);
    let largest = sv.first().copied().unwrap_or(0.0);
    let relative_margin = if largest > 0.0 {
        sv.last().copied().unwrap_or(0.0) / largest
    } else {
        0.0
    };
    let witness = (!extremal).then(|| {
        let (_, vecs) = eigh(&(a.adjoint() * &a));
        let v = vecs.column(0);
        Mat::from_fn(n, n, |i, j| v[i * n + j])
    });
    ExtremalityReport {
        extremal,
        relative_margin,
        singular_values: sv,
        witness,
    }
}

/// Unnormalized Choi matrix `Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: Mat,
}

impl ChoiMatrix {
    pub fn new(matrix: Mat, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if matrix.shape() != (n, n) {
            return Err(HtoError::Shape(format!(
                "Choi matrix for {dim_in}→{dim_out} must be {n}×{n}"
            )));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > 1e-10 {
            return Err(HtoError::invariant("Choi hermiticity", defect, 1e-10));
        }
        let matrix = linalg::symmetrize(&matrix);
        let min_eig = eigh(&matrix).0[0];
        if min_eig < -1e-10 {
            return Err(HtoError::invariant("Choi positivity", -min_eig, 1e-10));
        }
        let reduced = crate::operator::partial_trace(&matrix, &[dim_in, dim_out], &[0])?;
        let defect = max_abs(&(reduced - linalg::identity(dim_in)));
        if defect > TP_TOL {
            return Err(HtoError::invariant("Choi trace preservation", defect, TP_TOL));
        }
        Ok(Self {
            dim_in,
            dim_out,
            matrix,
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn rank(&self) -> usize {
        let (vals, _) = eigh(&self.matrix);
        let top = vals.last().copied().unwrap_or(0.0);
        vals.iter().filter(|&&v| v > CHOI_RANK_TOL * top).count()
    }

    /// Minimal Kraus set from the eigendecomposition.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let (vals, vecs) = eigh(&self.matrix);
        let top = vals.last().copied().unwrap_or(0.0);
        let mut ops = Vec::new();
        for (k, &lam) in vals.iter().enumerate().rev() {
            if lam <= CHOI_RANK_TOL * top {
                continue;
            }
            let v = vecs.column(k);
            let s = c(lam.sqrt());
            ops.push(Mat::from_fn(self.dim_out, self.dim_in, |o, i| v[i * self.dim_out + o] * s));
        }
        let mut ch = KrausChannel::new(ops)?;
        ch.minimal = true;
        Ok(ch)
    }
}

pub fn from_choi(choi: &ChoiMatrix) -> Result<KrausChannel> {
    choi.to_kraus()
}

/// Mixture `Σ λ_i E_i` with Kraus operators `√λ_i M^{(i)}_k`.
pub fn convex_combine(channels: &[KrausChannel], weights: &[f64]) -> Result<KrausChannel> {
    validate_weights(weights, channels.len())?;
    let first = &channels[0];
    if channels
        .iter()
        .any(|ch| ch.dim_in != first.dim_in || ch.dim_out != first.dim_out)
    {
        return Err(HtoError::Shape("channels in a mixture must share dims".into()));
    }
    let mut ops = Vec::new();
    for (ch, &w) in channels.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        ops.extend(ch.ops.iter().map(|m| m * c(w.sqrt())));
    }
    KrausChannel::new(ops)
}

pub(crate) fn validate_weights(weights: &[f64], count: usize) -> Result<()> {
    if weights.len() != count || count == 0 {
        return Err(HtoError::Shape(format!(
            "{count} items need {count} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(HtoError::Contract(format!("weights must be nonnegative, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(HtoError::invariant("weights sum to one", (total - 1.0).abs(), 1e-9));
    }
    Ok(())
}

/// Computational basis states followed by Haar-random pure states from a fixed seed.
pub fn probe_states(d: usize, extra: usize) -> Vec<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut probes: Vec<Mat> = (0..d)
        .map(|i| {
            let mut m = Mat::zeros(d, d);
            m[(i, i)] = ONE;
            m
        })
        .collect();
    for _ in 0..extra {
        let v = random::pure_vector(&mut rng, d);
        probes.push(&v * v.adjoint());
    }
    probes
}

/// Largest output trace distance over the probe set. This under-approximates
/// the diamond distance.
pub fn channel_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Err(HtoError::Shape("channel distance needs equal dims".into()));
    }
    Ok(probe_states(a.dim_in, DEFAULT_PROBES)
        .iter()
        .map(|p| trace_distance(&a.apply_matrix(p), &b.apply_matrix(p)))
        .fold(0.0, f64::max))
}

/// `|i⟩⟨j|` on `C^d`.
pub fn unit_matrix(d: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::from_element(d, d, ZERO);
    m[(i, j)] = ONE;
    m
}

//! Dense realizations of channels and their heat transfer operators.

use crate::channel::{validate_weights, ChoiMatrix, KrausChannel};
use crate::error::{HtoError, Result};
use crate::linalg::{self, c, max_abs, Mat, ZERO};
use crate::operator::{
    self, gibbs_state, j_function, relative_entropy_to_gibbs, von_neumann_entropy, DensityMatrix,
    HermitianOperator, Isometry, Units,
};

/// Agreement required between the energy and the dimensionless HTO formulas.
pub const FORMULA_TOL: f64 = 1e-8;

/// A thermal bath, its Hamiltonian after the process, and an isometry on device ⊗ bath.
#[derive(Debug, Clone)]
pub struct DenseRealization {
    dim_a: usize,
    bath_h: HermitianOperator,
    bath_h_out: HermitianOperator,
    beta: f64,
    v: Isometry,
}

impl DenseRealization {
    pub fn new(dim_a: usize, bath_h: HermitianOperator, beta: f64, v: Isometry) -> Result<Self> {
        let out = bath_h.clone();
        Self::with_output_bath(dim_a, bath_h, out, beta, v)
    }

    /// Thermal weights that underflow to zero are kept as exact zeros; they
    /// contribute nothing to the heat or the induced channel.
    pub fn with_output_bath(
        dim_a: usize,
        bath_h: HermitianOperator,
        bath_h_out: HermitianOperator,
        beta: f64,
        v: Isometry,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(HtoError::Contract(format!("β must be finite and positive, got {beta}")));
        }
        if dim_a == 0 {
            return Err(HtoError::Shape("device dimension must be positive".into()));
        }
        if bath_h.units() != Units::Energy || bath_h_out.units() != Units::Energy {
            return Err(HtoError::Contract("bath Hamiltonians carry energy units".into()));
        }
        let (d_in, d_out) = (dim_a * bath_h.dim(), dim_a * bath_h_out.dim());
        if v.dim_in() != d_in || v.dim_out() != d_out {
            return Err(HtoError::Shape(format!(
                "isometry is {}×{}, expected {d_out}×{d_in} for dim_A = {dim_a}",
                v.dim_out(),
                v.dim_in()
            )));
        }
        let levels = bath_h.eigenvalues();
        if levels.iter().chain(&bath_h_out.eigenvalues()).any(|e| !e.is_finite()) {
            return Err(HtoError::Numeric("bath energies must be finite".into()));
        }
        Ok(Self {
            dim_a,
            bath_h,
            bath_h_out,
            beta,
            v,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.bath_h.dim()
    }

    pub fn dim_b_out(&self) -> usize {
        self.bath_h_out.dim()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn bath_h(&self) -> &HermitianOperator {
        &self.bath_h
    }

    pub fn bath_h_out(&self) -> &HermitianOperator {
        &self.bath_h_out
    }

    pub fn isometry(&self) -> &Isometry {
        &self.v
    }

    pub fn bath_state(&self) -> (DensityMatrix, f64) {
        gibbs_state(&self.bath_h, self.beta).expect("β validated at construction")
    }

    /// Bath levels with their thermal weights, and the columns `V(|a⟩ ⊗ |e_k⟩)`
    /// scaled by `√p_k` for each bath eigenvector `e_k`.
    fn weighted_columns(&self) -> (Vec<f64>, Vec<f64>, Mat) {
        let db = self.dim_b();
        let v = self.v.matrix();
        let (levels, mut x) = match linalg::real_diagonal(self.bath_h.matrix()) {
            Some(levels) => (levels, v.clone()),
            None => {
                let spec = self.bath_h.spectral();
                let rot = linalg::kron(&linalg::identity(self.dim_a), &spec.eigenvectors)
                    .expect("same size as the isometry input");
                (spec.eigenvalues, v * rot)
            }
        };
        let (probs, _) = operator::boltzmann(&levels, self.beta);
        for a in 0..self.dim_a {
            for (k, &p) in probs.iter().enumerate() {
                let s = c(p.sqrt());
                for r in 0..x.nrows() {
                    x[(r, a * db + k)] *= s;
                }
            }
        }
        (probs, levels, x)
    }

    /// Final joint state `V(ρ ⊗ ρ_B)V†`.
    pub fn final_joint_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let (rho_b, _) = self.bath_state();
        let joint = rho.tensor(&rho_b)?;
        let v = self.v.matrix();
        let out = v * joint.matrix() * v.adjoint();
        DensityMatrix::renormalized(out, 1e-8)?.with_subsystems(&[self.dim_a, self.dim_b_out()])
    }

    /// Bath energy change computed from the final joint state.
    pub fn direct_bath_energy_change(&self, rho: &DensityMatrix) -> Result<f64> {
        let (rho_b, _) = self.bath_state();
        let joint = self.final_joint_state(rho)?;
        let rho_b_final = joint.partial_trace(&[self.dim_a, self.dim_b_out()], &[1])?;
        Ok(self.bath_h_out.expectation(&rho_b_final) - self.bath_h.expectation(&rho_b))
    }
}

/// The outcome of an HTO computation.
#[derive(Debug, Clone)]
pub struct HeatReport {
    pub hto: HermitianOperator,
    pub channel: KrausChannel,
    pub j_of_beta_q: f64,
    pub bath_log_partition: f64,
    pub beta: f64,
}

/// `Σ_k x_{ak}† D x_{a'k}` contracted over the bath index, where the columns of
/// `x` are grouped per device index `a` and `d` acts on the output bath.
fn sandwich(r: &DenseRealization, x: &Mat, d_out_op: &Mat) -> Mat {
    let da = r.dim_a;
    let db = r.dim_b();
    let dbo = r.dim_b_out();
    let lifted = if linalg::real_diagonal(d_out_op).is_some() {
        let mut y = x.clone();
        for row in 0..y.nrows() {
            let s = d_out_op[(row % dbo, row % dbo)];
            for col in 0..y.ncols() {
                y[(row, col)] *= s;
            }
        }
        y
    } else {
        let mut y = Mat::zeros(x.nrows(), x.ncols());
        for a in 0..da {
            let block = d_out_op * x.rows(a * dbo, dbo);
            y.rows_mut(a * dbo, dbo).copy_from(&block);
        }
        y
    };
    let mut q = Mat::zeros(da, da);
    for a in 0..da {
        for b in 0..da {
            let mut acc = ZERO;
            for k in 0..db {
                acc += x.column(a * db + k).dotc(&lifted.column(b * db + k));
            }
            q[(a, b)] = acc;
        }
    }
    q
}

/// Induced channel `ρ ↦ tr_B V(ρ ⊗ ρ_B)V†`, returned with a minimal Kraus set.
pub fn induced_channel(r: &DenseRealization) -> Result<KrausChannel> {
    let da = r.dim_a;
    let db = r.dim_b();
    let dbo = r.dim_b_out();
    let (_, _, x) = r.weighted_columns();
    let n = da * da;
    linalg::check_dim(n, n)?;
    let mut choi = Mat::zeros(n, n);
    for i in 0..da {
        for j in 0..da {
            for o in 0..da {
                for p in 0..da {
                    let mut acc = ZERO;
                    for bo in 0..dbo {
                        let ri = o * dbo + bo;
                        let rj = p * dbo + bo;
                        for k in 0..db {
                            acc += x[(ri, i * db + k)] * x[(rj, j * db + k)].conj();
                        }
                    }
                    choi[(i * da + o, j * da + p)] = acc;
                }
            }
        }
    }
    ChoiMatrix::new(choi, da, da)?.to_kraus()
}

/// Heat transfer operator `Q = tr_B[(1⊗ρ_B)V†(1⊗H_B′)V] − E_B·1`, cross-checked
/// against the dimensionless form built from `ln ρ_B`.
pub fn compute_hto(r: &DenseRealization) -> Result<HeatReport> {
    let beta = r.beta;
    let (probs, levels, x) = r.weighted_columns();
    let e_b: f64 = probs
        .iter()
        .zip(&levels)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, e)| p * e)
        .sum();
    let (_, log_z) = r.bath_state();

    let h_out = r.bath_h_out.matrix();
    let q = sandwich(r, &x, h_out) - linalg::identity(r.dim_a) * c(e_b);
    let q = linalg::symmetrize(&q);

    // ln of the output-space thermal state from the spectrum, so tiny weights keep full precision.
    let log_rho_out = match linalg::real_diagonal(h_out) {
        Some(levels_out) => {
            let (_, log_z_out) = operator::boltzmann(&levels_out, beta);
            let logs: Vec<f64> = levels_out.iter().map(|&e| -beta * e - log_z_out).collect();
            (linalg::diag(&logs), log_z_out)
        }
        None => {
            let spec_out = r.bath_h_out.spectral();
            let (_, log_z_out) = operator::boltzmann(&spec_out.eigenvalues, beta);
            let logs: Vec<f64> = spec_out.eigenvalues.iter().map(|&e| -beta * e - log_z_out).collect();
            (linalg::from_spectrum(&logs, &spec_out.eigenvectors), log_z_out)
        }
    };
    let (log_rho_out, log_z_out) = log_rho_out;
    let neg_entropy: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum();
    let g = sandwich(r, &x, &log_rho_out) * c(-1.0)
        + linalg::identity(r.dim_a) * c(neg_entropy - (log_z_out - log_z));
    let g = linalg::symmetrize(&g);
    let scaled_q = &q * c(beta);
    let deviation = max_abs(&(&scaled_q - &g));
    let scale = max_abs(&scaled_q).max(1.0);
    if deviation > FORMULA_TOL * scale {
        return Err(HtoError::Consistency {
            what: "energy and dimensionless HTO formulas disagree".into(),
            deviation,
        });
    }

    let hto = HermitianOperator::energy(q)?;
    let j = j_function(&hto.scaled(beta, Units::Dimensionless));
    Ok(HeatReport {
        hto,
        channel: induced_channel(r)?,
        j_of_beta_q: j,
        bath_log_partition: log_z,
        beta,
    })
}

/// Average heat `tr ρQ`.
pub fn average_heat(report: &HeatReport, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != report.hto.dim() {
        return Err(HtoError::Shape("state and HTO dims differ".into()));
    }
    Ok(report.hto.expectation(rho))
}

/// Average total work `tr(E(ρ)H_A′ − ρH_A + ρQ)`.
pub fn total_work(
    report: &HeatReport,
    rho: &DensityMatrix,
    h_a: &HermitianOperator,
    h_a_prime: &HermitianOperator,
) -> Result<f64> {
    if h_a.dim() != rho.dim() || h_a_prime.dim() != report.channel.dim_out() {
        return Err(HtoError::Shape("Hamiltonian dims do not match the device".into()));
    }
    let out = report.channel.apply(rho)?;
    Ok(h_a_prime.expectation(&out) - h_a.expectation(rho) + average_heat(report, rho)?)
}

/// Solves `Δ tanh(βΔ/2) = a` for the rider gap.
pub fn rider_gap(a: f64, beta: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(HtoError::Contract(format!("rider heat must be nonnegative, got {a}")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| x * (beta * x / 2.0).tanh() - a;
    let (mut lo, mut hi) = (0.0, a + 2.0 / beta + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(HtoError::Numeric("rider bisection did not converge".into()))
}

/// Appends a flipped two-level bath system that absorbs exactly `a` extra heat.
pub fn add_heat_rider(r: &DenseRealization, a: f64) -> Result<DenseRealization> {
    let gap = rider_gap(a, r.beta)?;
    let h_c = HermitianOperator::from_diagonal(&[gap / 2.0, -gap / 2.0], Units::Energy)?;
    let bath_h = r.bath_h.local_sum(&h_c)?;
    let bath_h_out = r.bath_h_out.local_sum(&h_c)?;
    let v = Isometry::new(linalg::kron(r.v.matrix(), &linalg::pauli_x())?)?;
    DenseRealization::with_output_bath(r.dim_a, bath_h, bath_h_out, r.beta, v)
}

/// Mixes realizations through a classical controller register `C` whose
/// diagonal state `Σ λ_i |i⟩⟨i|` is thermal for `H_C = −(1/β) ln λ_i` (shifted to start at 0).
pub fn controller_combine(rs: &[DenseRealization], weights: &[f64]) -> Result<DenseRealization> {
    validate_weights(weights, rs.len())?;
    let first = &rs[0];
    for r in rs {
        let same_spaces = r.dim_a == first.dim_a
            && r.dim_b() == first.dim_b()
            && r.dim_b_out() == first.dim_b_out()
            && r.beta == first.beta;
        if !same_spaces
            || !r.bath_h.approx_eq(&first.bath_h, 1e-12)
            || !r.bath_h_out.approx_eq(&first.bath_h_out, 1e-12)
        {
            return Err(HtoError::Contract(
                "controller mixing needs a common device, bath and β".into(),
            ));
        }
    }
    let kept: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .collect();
    if kept.len() == 1 {
        return Ok(rs[kept[0].0].clone());
    }
    let n = kept.len();
    let levels: Vec<f64> = kept.iter().map(|(_, w)| -w.ln() / first.beta).collect();
    let floor = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let levels: Vec<f64> = levels.iter().map(|e| e - floor).collect();
    let h_c = HermitianOperator::from_diagonal(&levels, Units::Energy)?;

    let (rows, cols) = (first.v.dim_out() * n, first.v.dim_in() * n);
    linalg::check_dim(rows, cols)?;
    let mut v = Mat::zeros(rows, cols);
    for (slot, (idx, _)) in kept.iter().enumerate() {
        let proj = crate::channel::unit_matrix(n, slot, slot);
        v += linalg::kron(rs[*idx].v.matrix(), &proj)?;
    }
    DenseRealization::with_output_bath(
        first.dim_a,
        first.bath_h.local_sum(&h_c)?,
        first.bath_h_out.local_sum(&h_c)?,
        first.beta,
        Isometry::new(v)?,
    )
}

/// Right-hand side of `ΔE_B = (1/β)[S(ρ′‖ρ) + S(ρ′) − S(ρ)]` for a thermal `ρ`.
pub fn deviation_identity_rhs(h_b: &HermitianOperator, beta: f64, rho_prime: &DensityMatrix) -> Result<f64> {
    let (rho, _) = gibbs_state(h_b, beta)?;
    let rel = relative_entropy_to_gibbs(rho_prime, h_b, beta)?;
    Ok((rel + von_neumann_entropy(rho_prime) - von_neumann_entropy(&rho)) / beta)
}

/// Left-hand side `tr(ρ′ − ρ)H_B` of the same identity.
pub fn deviation_identity_lhs(h_b: &HermitianOperator, beta: f64, rho_prime: &DensityMatrix) -> Result<f64> {
    let (rho, _) = gibbs_state(h_b, beta)?;
    Ok(h_b.expectation(rho_prime) - h_b.expectation(&rho))
}

/// Trivial realization: the bath is untouched.
pub fn identity_realization(dim_a: usize, bath_h: HermitianOperator, beta: f64) -> Result<DenseRealization> {
    let d = dim_a * bath_h.dim();
    DenseRealization::new(dim_a, bath_h, beta, Isometry::identity(d))
}

//! Random matrices, states and channels for tests and probes.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, c, C64, Mat};
use crate::operator::DensityMatrix;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, |_, _| C64::new(gaussian(rng) * s, gaussian(rng) * s))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    let qr = ginibre(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random isometry `C^cols → C^rows`.
pub fn haar_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    haar_unitary(rng, rows).columns(0, cols).into_owned()
}

/// Haar-random pure state vector.
pub fn pure_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<C64> {
    let g = ginibre(rng, d, 1);
    let norm = g.norm();
    DVector::from_iterator(d, g.iter().map(|z| z / norm))
}

/// Random mixed state `GG†/tr` with a `d × k` Ginibre factor (rank ≤ k).
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> DensityMatrix {
    let g = ginibre(rng, d, k.max(1));
    let m = &g * g.adjoint();
    let tr = linalg::trace_re(&m);
    DensityMatrix::new(m / c(tr)).expect("Ginibre states are valid")
}

/// Random full-rank state, bounded away from the boundary.
pub fn random_full_rank_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint() + linalg::identity(d) * c(0.05);
    let tr = linalg::trace_re(&m);
    DensityMatrix::new(m / c(tr)).expect("regularized states are valid")
}

/// Random hermitian matrix with entries of the given scale.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> Mat {
    linalg::symmetrize(&(ginibre(rng, d, d) * c(scale)))
}

/// Random probability vector drawn from a flat Dirichlet distribution.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Kraus operators of a random channel: blocks of a Haar isometry `C^d_in → C^d_out ⊗ C^n`.
///
/// Panics unless `d_out · n ≥ d_in`.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, n: usize) -> Vec<Mat> {
    assert!(d_out * n >= d_in, "a channel C^{d_in} → C^{d_out} needs at least {} Kraus operators", d_in.div_ceil(d_out));
    let v = haar_isometry(rng, d_out * n, d_in);
    (0..n).map(|k| v.rows(k * d_out, d_out).into_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            let u = haar_unitary(&mut rng, d);
            assert!(linalg::max_abs(&(u.adjoint() * &u - linalg::identity(d))) < 1e-12);
        }
    }

    #[test]
    fn random_kraus_is_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ops = random_kraus(&mut rng, 3, 2, 4);
        let sum = ops.iter().fold(Mat::zeros(3, 3), |acc, m| acc + m.adjoint() * m);
        assert!(linalg::max_abs(&(sum - linalg::identity(3))) < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_probabilities(&mut rng, 5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(p.iter().all(|&x| x > 0.0));
    }
}

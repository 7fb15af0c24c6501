//! Dense complex-matrix helpers shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; everything here works on
//! semantic indices only, so storage order never leaks into the API.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{HtoError, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

/// Upper bound on the number of entries of any dense matrix we build.
pub const MAX_MATRIX_ENTRIES: usize = 1 << 22;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn check_dim(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_MATRIX_ENTRIES => Ok(()),
        _ => Err(HtoError::Resource(format!(
            "{rows}×{cols} matrix exceeds the cap of {MAX_MATRIX_ENTRIES} entries"
        ))),
    }
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn kron(a: &Mat, b: &Mat) -> Result<Mat> {
    check_dim(a.nrows() * b.nrows(), a.ncols() * b.ncols())?;
    Ok(a.kronecker(b))
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &Mat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.adjoint()) * c(0.5)
}

pub fn trace_re(m: &Mat) -> f64 {
    m.trace().re
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> C64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn diag(values: &[f64]) -> Mat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { ZERO })
}

/// Eigendecomposition of a hermitian matrix with eigenvalues in ascending order.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], identity(1));
    }
    if let Some(d) = real_diagonal(m) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let mut vectors = Mat::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors[(i, col)] = ONE;
        }
        return (order.iter().map(|&i| d[i]).collect(), vectors);
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Diagonal entries when every off-diagonal entry is exactly zero.
pub fn real_diagonal(m: &Mat) -> Option<Vec<f64>> {
    let n = m.nrows();
    for j in 0..m.ncols() {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                return None;
            }
        }
    }
    Some((0..n).map(|i| m[(i, i)].re).collect())
}

/// Applies a real function to the spectrum of a hermitian matrix.
pub fn hermitian_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = eigh(m);
    from_spectrum(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>(), &vecs)
}

/// `P diag(values) P†`.
pub fn from_spectrum(values: &[f64], vectors: &Mat) -> Mat {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= v;
        }
    }
    scaled * vectors.adjoint()
}

/// Column-stacked vectorization, index `col * rows + row`.
pub fn vectorize(m: &Mat) -> DVector<C64> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Trace norm of a hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &Mat) -> f64 {
    eigh(m).0.iter().map(|v| v.abs()).sum()
}

/// Orthonormal basis whose first column is `v` (normalized), completed by
/// Gram–Schmidt against the computational basis.
pub fn complete_basis(v: &DVector<C64>) -> Result<Mat> {
    let n = v.len();
    let norm = v.norm();
    if norm < 1e-12 {
        return Err(HtoError::Contract("cannot complete a zero vector".into()));
    }
    let mut cols: Vec<DVector<C64>> = vec![v / c(norm)];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut w = DVector::<C64>::zeros(n);
        w[k] = ONE;
        for u in &cols {
            let proj = u.dotc(&w);
            w -= u * proj;
        }
        let nw = w.norm();
        if nw > 1e-8 {
            cols.push(w / c(nw));
        }
    }
    Ok(Mat::from_columns(&cols))
}

/// Swap operator on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> Mat {
    let n = d * d;
    let mut s = Mat::zeros(n, n);
    for a in 0..d {
        for b in 0..d {
            s[(b * d + a, a * d + b)] = ONE;
        }
    }
    s
}

pub fn pauli_x() -> Mat {
    Mat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// Log-sum-exp of `-x_i`, i.e. `ln Σ e^{-x_i}`, stable for large spreads.
pub fn log_sum_exp_neg(xs: &[f64]) -> f64 {
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return -min;
    }
    let s: f64 = xs.iter().map(|&x| (-(x - min)).exp()).sum();
    -min + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_is_sorted_and_reconstructs() {
        let m = Mat::from_row_slice(
            3,
            3,
            &[
                c(2.0),
                C64::new(0.5, 0.3),
                ZERO,
                C64::new(0.5, -0.3),
                c(-1.0),
                c(0.2),
                ZERO,
                c(0.2),
                c(0.5),
            ],
        );
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(max_abs(&(from_spectrum(&vals, &vecs) - &m)) < 1e-12);
    }

    #[test]
    fn completion_keeps_first_column() {
        let v = DVector::from_vec(vec![c(0.0), C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let b = complete_basis(&v).unwrap();
        assert!(max_abs(&(b.adjoint() * &b - identity(3))) < 1e-12);
        assert!((b.column(0) - &v).norm() < 1e-14);
    }

    #[test]
    fn swap_exchanges_factors() {
        let s = swap_operator(2);
        let a = Mat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let b = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(5.0)]);
        let lhs = &s * kron(&a, &b).unwrap() * &s;
        assert!(max_abs(&(lhs - kron(&b, &a).unwrap())) < 1e-14);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(check_dim(1 << 11, 1 << 11).is_ok());
        assert!(matches!(check_dim(1 << 12, 1 << 11), Err(HtoError::Resource(_))));
    }
}

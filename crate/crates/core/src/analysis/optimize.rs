//! Quasi-Newton minimization over density matrices.
//!
//! States are parameterized as `ρ = LL†/tr(LL†)` with an unconstrained complex
//! `L`, flattened to `2d²` reals (real parts first, then imaginary parts).

use rand::Rng;

use crate::linalg::{self, c, C64, Mat};
use crate::random;

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            grad_tol: 1e-10,
            f_tol: 1e-15,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with Armijo backtracking. `f` returns the value and gradient.
pub fn minimize_bfgs<F>(f: F, x0: Vec<f64>, opts: BfgsOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut h = vec![0.0; n * n];
    let reset = |h: &mut Vec<f64>| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = 1.0;
        }
    };
    reset(&mut h);
    for _ in 0..opts.max_iter {
        if !fx.is_finite() || dot(&g, &g).sqrt() < opts.grad_tol {
            break;
        }
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&p, &g);
        if slope >= 0.0 {
            reset(&mut h);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&p, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + step * pi).collect();
            let (ft, gt) = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        } else {
            reset(&mut h);
        }
        if improvement.abs() <= opts.f_tol * fx.abs().max(1.0) {
            break;
        }
    }
    (x, fx)
}

/// `L` from its flattened real parameters.
pub fn params_to_factor(x: &[f64], d: usize) -> Mat {
    let n = d * d;
    Mat::from_fn(d, d, |i, j| C64::new(x[i * d + j], x[n + i * d + j]))
}

pub fn factor_to_params(l: &Mat) -> Vec<f64> {
    let d = l.nrows();
    let mut x = vec![0.0; 2 * d * d];
    for i in 0..d {
        for j in 0..d {
            x[i * d + j] = l[(i, j)].re;
            x[d * d + i * d + j] = l[(i, j)].im;
        }
    }
    x
}

/// `ρ = LL†/tr(LL†)` and the normalizer.
pub fn factor_to_state(l: &Mat) -> (Mat, f64) {
    let m = l * l.adjoint();
    let t = linalg::trace_re(&m);
    (linalg::symmetrize(&(m / c(t))), t)
}

/// Square-root factor of a state, used to seed the optimizer.
pub fn state_to_factor(rho: &Mat) -> Mat {
    linalg::hermitian_fn(rho, |v| v.max(0.0).sqrt())
}

/// Minimizes a state functional `φ(ρ)` given its value and hermitian gradient
/// `G = ∂φ/∂ρ`, starting from the factor `l0`.
pub fn minimize_over_states<F>(phi: &F, l0: &Mat, opts: BfgsOptions) -> (Mat, f64)
where
    F: Fn(&Mat) -> (f64, Mat),
{
    let d = l0.nrows();
    let objective = |x: &[f64]| {
        let l = params_to_factor(x, d);
        let (rho, t) = factor_to_state(&l);
        if !(t.is_finite() && t > 0.0) {
            return (f64::INFINITY, vec![0.0; x.len()]);
        }
        let (value, g) = phi(&rho);
        let mean = linalg::trace_product(&g, &rho).re;
        let centered = g - linalg::identity(d) * c(mean);
        let grad_l = centered * &l * c(2.0 / t);
        (value, factor_to_params(&grad_l))
    };
    let (x, f) = minimize_bfgs(objective, factor_to_params(l0), opts);
    let (rho, _) = factor_to_state(&params_to_factor(&x, d));
    (rho, f)
}

/// Multi-start minimization: scores `samples` random states (plus `extra`
/// seeds), refines the best `starts` of them, and returns the overall minimum.
pub fn multistart_minimize<F, R>(
    phi: &F,
    d: usize,
    samples: usize,
    starts: usize,
    extra: &[Mat],
    rng: &mut R,
) -> (Mat, f64)
where
    F: Fn(&Mat) -> (f64, Mat),
    R: Rng + ?Sized,
{
    let mut pool: Vec<(f64, Mat)> = extra.iter().map(|m| (phi(m).0, m.clone())).collect();
    for k in 0..samples.max(starts) {
        let rank = 1 + k % d;
        let rho = random::random_state(rng, d, rank).matrix().clone();
        pool.push((phi(&rho).0, rho));
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = pool[0].clone();
    for (_, rho) in pool.iter().take(starts.max(1) + extra.len()) {
        // Keep every start strictly inside the state space.
        let interior = rho * c(1.0 - 1e-6) + linalg::identity(d) * c(1e-6 / d as f64);
        let (r, f) = minimize_over_states(phi, &state_to_factor(&interior), BfgsOptions::default());
        if f < best.0 {
            best = (f, r);
        }
    }
    (best.1, best.0)
}

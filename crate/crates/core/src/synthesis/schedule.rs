//! Bath level schedules `ε_i(ν)` and the `ν_k(s)` sequence families.

use serde::{Deserialize, Serialize};

use crate::error::{HtoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    /// Copies of the device, `d` levels, base energies from the HTO spectrum.
    X,
    /// Supply sites for the final state, `r` levels, base energies from its spectrum.
    Y,
}

/// One-parameter family of increasing sequences `ν_1 = 0 < ν_2 < … < 1`.
///
/// Levels depend on `ν` only through `u = ν/(1 − ν)`, which is evaluated in
/// closed form so that `ν` close to 1 keeps full precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NuFamily {
    /// `ν_k = (k−1)/((k−1) + s)`, so `u_k = (k−1)/s`.
    Rational,
    /// `ν_k = 1 − e^{−(k−1)/s}`, so `u_k = e^{(k−1)/s} − 1`.
    Exponential,
    /// Equal steps in the angle `θ = 2 arcsin √π` of the excited weight `π`,
    /// from the first site to a last site with `βc·u_N = (N−1)/s`. Depends on
    /// the schedule's base energies.
    #[default]
    Geodesic,
}

impl NuFamily {
    /// `u_k(s)` for the 1-based site index `k`; `None` for families that
    /// depend on the level schedule.
    pub fn u(self, k: usize, s: f64) -> Option<f64> {
        let x = (k.saturating_sub(1)) as f64 / s;
        match self {
            NuFamily::Rational => Some(x),
            NuFamily::Exponential => Some(x.exp_m1()),
            NuFamily::Geodesic => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NuFamily::Rational => "rational",
            NuFamily::Exponential => "exponential",
            NuFamily::Geodesic => "geodesic",
        }
    }
}

/// `ν = u/(1 + u)`.
pub fn nu_of_u(u: f64) -> f64 {
    u / (1.0 + u)
}

impl std::str::FromStr for NuFamily {
    type Err = HtoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(NuFamily::Rational),
            "exponential" => Ok(NuFamily::Exponential),
            "geodesic" => Ok(NuFamily::Geodesic),
            other => Err(HtoError::Format(format!("unknown ν family `{other}`"))),
        }
    }
}

/// `ε_0(ν) = 0`, `ε_i(ν) = base_i + c·ν/(1 − ν)` for `i ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub kind: SiteKind,
    pub base: Vec<f64>,
    pub c: f64,
}

impl LevelSchedule {
    pub fn new(kind: SiteKind, base: Vec<f64>, c: f64) -> Result<Self> {
        if base.is_empty() {
            return Err(HtoError::Shape("a schedule needs at least one level".into()));
        }
        if base[0] != 0.0 {
            return Err(HtoError::Contract("the zeroth level must sit at zero energy".into()));
        }
        if base.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(HtoError::Contract("base energies must be finite and nonnegative".into()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(HtoError::Contract(format!("divergence scale must be positive, got {c}")));
        }
        Ok(Self { kind, base, c })
    }

    pub fn levels(&self) -> usize {
        self.base.len()
    }

    /// Level energies at `u = ν/(1 − ν)`.
    pub fn energies_at_u(&self, u: f64) -> Vec<f64> {
        let shift = self.c * u;
        self.base
            .iter()
            .enumerate()
            .map(|(i, &b)| if i == 0 { 0.0 } else { b + shift })
            .collect()
    }

    pub fn energies(&self, nu: f64) -> Vec<f64> {
        self.energies_at_u(nu / (1.0 - nu))
    }

    /// `u_1, …, u_n` of `family` at scale `s`.
    pub fn u_sequence(&self, family: NuFamily, n: usize, s: f64, beta: f64) -> Vec<f64> {
        if let Some(u0) = family.u(1, s) {
            let mut out = vec![u0];
            out.extend((2..=n).map(|k| family.u(k, s).expect("fixed family")));
            return out;
        }
        let scale = beta * self.c;
        let x_last = (n.saturating_sub(1)) as f64 / s;
        let excited: Vec<f64> = self.base[1..].iter().map(|b| beta * b).collect();
        if excited.is_empty() || n < 2 {
            // One level: energies do not move, any increasing sequence will do.
            return (0..n).map(|k| k as f64 * x_last / (n.max(2) - 1) as f64 / scale).collect();
        }
        // ln A with A = Σ_{i≥1} e^{−β base_i}; π(x) = 1/(1 + e^{x − ln A}).
        let ln_a = crate::linalg::log_sum_exp_neg(&excited);
        let angle = |x: f64| 2.0 * (1.0 / (1.0 + (x - ln_a).exp())).sqrt().asin();
        let (theta_first, theta_last) = (angle(0.0), angle(x_last));
        let mut out = Vec::with_capacity(n);
        out.push(0.0);
        for k in 2..n {
            let t = (k - 1) as f64 / (n - 1) as f64;
            let theta = theta_first + (theta_last - theta_first) * t;
            // x = ln A + ln((1 − π)/π) = ln A + 2 ln cot(θ/2).
            let x = ln_a - 2.0 * (theta / 2.0).tan().ln();
            out.push(x.max(0.0) / scale);
        }
        out.push(x_last / scale);
        out
    }
}

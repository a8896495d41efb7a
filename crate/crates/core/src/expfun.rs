//! The exponential functional F_t = ∫₀ᵗ e^{as+B_s} ds.
//!
//! Moments come in closed form as divided differences of `exp`:
//!
//! ```text
//! m_t   = t·exp[0, bt]
//! E F²  = 2t²·exp[0, bt, (2b+1)t]
//! σ²_t  = 2t³·exp[0, bt, 2bt, (2b+1)t]          b = a + 1/2
//! ```
//!
//! (integrate e^{b(s+u)}(e^{min(s,u)} − 1) over the simplex s < u). Divided
//! differences stay well defined when points coincide, which covers the
//! removable singularities at a = −1/2, −1 and −3/2.

use serde::Serialize;

use crate::error::{finite, Error, Result};
use crate::montecarlo::{sample_records, sample_vec, standard_normal, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFunParams {
    pub a: f64,
    pub t: f64,
}

impl ExpFunParams {
    pub fn new(a: f64, t: f64) -> Result<Self> {
        finite("expfun params", "a", a)?;
        finite("expfun params", "t", t)?;
        if t <= 0.0 {
            return Err(Error::domain(
                "expfun params",
                format!("horizon t must be > 0, got {t}"),
            ));
        }
        Ok(ExpFunParams { a, t })
    }

    pub fn moments(&self) -> ExpFunMoments {
        let b = self.a + 0.5;
        let t = self.t;
        let m_t = t * exp_divided_difference(&[0.0, b * t]);
        let sigma2_t = 2.0 * t.powi(3) * exp_divided_difference(&[0.0, b * t, 2.0 * b * t, (2.0 * b + 1.0) * t]);
        ExpFunMoments {
            m_t,
            sigma2_t,
            sigma_t: sigma2_t.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    LeftPoint,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathConfig {
    pub n_steps: usize,
    pub scheme: Scheme,
}

impl PathConfig {
    pub fn new(n_steps: usize, scheme: Scheme) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::domain(
                "path config",
                format!("n_steps must be >= 2, got {n_steps}"),
            ));
        }
        Ok(PathConfig { n_steps, scheme })
    }

    /// Trapezoid with 2000 steps per 0.1 time units.
    pub fn default_for(t: f64) -> Self {
        let n = (2000.0 * t / 0.1).round().max(2.0);
        PathConfig {
            n_steps: n as usize,
            scheme: Scheme::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFunMoments {
    pub m_t: f64,
    pub sigma2_t: f64,
    pub sigma_t: f64,
}

/// Divided difference exp[x₀, …, x_n], robust to coincident points.
pub fn exp_divided_difference(points: &[f64]) -> f64 {
    assert!(!points.is_empty());
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    dd_sorted(&xs)
}

/// Points closer together than this use the power series.
const SERIES_SPREAD: f64 = 0.5;

fn dd_sorted(xs: &[f64]) -> f64 {
    let n = xs.len() - 1;
    if n == 0 {
        return xs[0].exp();
    }
    let spread = xs[n] - xs[0];
    if spread > SERIES_SPREAD {
        return (dd_sorted(&xs[1..]) - dd_sorted(&xs[..n])) / spread;
    }
    // exp[x₀..x_n] = e^{x₀} Σ_k h_k(d)/(k+n)!, d_i = x_i − x₀ ≥ 0,
    // h_k the complete homogeneous symmetric polynomials.
    const TERMS: usize = 40;
    let mut h = [0.0f64; TERMS];
    h[0] = 1.0;
    for &x in &xs[1..] {
        let d = x - xs[0];
        for k in 1..TERMS {
            h[k] += d * h[k - 1];
        }
    }
    let mut inv_fact = 1.0 / (1..=n).map(|i| i as f64).product::<f64>();
    let mut sum = 0.0;
    for (k, hk) in h.iter().enumerate() {
        let term = hk * inv_fact;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        inv_fact /= (k + n + 1) as f64;
    }
    xs[0].exp() * sum
}

pub fn mean_mt(a: f64, t: f64) -> Result<f64> {
    Ok(ExpFunParams::new(a, t)?.moments().m_t)
}

pub fn second_moment(a: f64, t: f64) -> Result<f64> {
    let p = ExpFunParams::new(a, t)?;
    let b = p.a + 0.5;
    Ok(2.0 * t * t * exp_divided_difference(&[0.0, b * t, (2.0 * b + 1.0) * t]))
}

pub fn variance_sigma2(a: f64, t: f64) -> Result<f64> {
    Ok(ExpFunParams::new(a, t)?.moments().sigma2_t)
}

/// Quadrature of e^{as+B_s} along a path given by its Brownian increments
/// (not standardized: each has variance t/n).
pub fn functional_from_increments(params: &ExpFunParams, scheme: Scheme, increments: &[f64]) -> f64 {
    let n = increments.len();
    let h = params.t / n as f64;
    let mut b = 0.0;
    let mut sum = match scheme {
        Scheme::Trapezoid => 0.5,
        Scheme::LeftPoint => 1.0,
    };
    for (k, w) in increments.iter().enumerate() {
        b += w;
        let v = (params.a * (k + 1) as f64 * h + b).exp();
        sum += match (scheme, k + 1 == n) {
            (Scheme::Trapezoid, true) => 0.5 * v,
            (Scheme::LeftPoint, true) => 0.0,
            _ => v,
        };
    }
    h * sum
}

/// One draw of F_t; consumes exactly `cfg.n_steps` normal variates.
pub fn sample_functional(params: &ExpFunParams, cfg: &PathConfig, rng: &mut Stream) -> f64 {
    let n = cfg.n_steps;
    let h = params.t / n as f64;
    let sd = h.sqrt();
    let mut b = 0.0;
    let mut sum = 0.0;
    for k in 1..n {
        b += sd * standard_normal(rng);
        sum += (params.a * k as f64 * h + b).exp();
    }
    b += sd * standard_normal(rng);
    let last = (params.a * params.t + b).exp();
    match cfg.scheme {
        Scheme::Trapezoid => h * (0.5 + sum + 0.5 * last),
        Scheme::LeftPoint => h * (1.0 + sum),
    }
}

/// Draws one path on a grid of `2·cfg.n_steps` cells and returns the
/// quadrature on the coarse grid (every other point) and on the fine grid.
/// Both estimates share the same Brownian path.
pub fn sample_refined_pair(params: &ExpFunParams, cfg: &PathConfig, rng: &mut Stream) -> [f64; 2] {
    let n_fine = 2 * cfg.n_steps;
    let h = params.t / n_fine as f64;
    let sd = h.sqrt();
    let mut b = 0.0;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in 1..n_fine {
        b += sd * standard_normal(rng);
        let v = (params.a * k as f64 * h + b).exp();
        if k % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    b += sd * standard_normal(rng);
    let last = (params.a * params.t + b).exp();
    match cfg.scheme {
        Scheme::Trapezoid => [2.0 * h * (0.5 + even + 0.5 * last), h * (0.5 + even + odd + 0.5 * last)],
        Scheme::LeftPoint => [2.0 * h * (1.0 + even), h * (1.0 + even + odd)],
    }
}

pub fn sample_many(params: &ExpFunParams, cfg: &PathConfig, n: usize, seed: u64) -> Vec<f64> {
    sample_vec(n, seed, |rng| sample_functional(params, cfg, rng))
}

pub fn sample_refined_pairs(params: &ExpFunParams, cfg: &PathConfig, n: usize, seed: u64) -> Vec<[f64; 2]> {
    sample_records(n, seed, |rng| sample_refined_pair(params, cfg, rng))
}

/// (f − m_t)/σ_t
pub fn standardize(f: f64, moments: &ExpFunMoments) -> Result<f64> {
    if !(moments.sigma_t > 0.0 && moments.sigma_t.is_finite()) {
        return Err(Error::domain(
            "standardize",
            format!("degenerate sigma {}", moments.sigma_t),
        ));
    }
    Ok((f - moments.m_t) / moments.sigma_t)
}

fn nonnegative(op: &'static str, x: f64) -> Result<f64> {
    finite(op, "x", x)?;
    if x < 0.0 {
        return Err(Error::domain(op, format!("requires x >= 0, got {x}")));
    }
    Ok(x)
}

/// Upper-tail bound P(F̃_t ≥ x) ≤ exp(−ln²(1 + xσ_t/m_t)/(2t)).
pub fn tail_upper_dk1(x: f64, params: &ExpFunParams, moments: &ExpFunMoments) -> Result<f64> {
    let x = nonnegative("tail_upper_dk1", x)?;
    Ok(dk1(x, params, moments))
}

/// Lower-tail bound P(F̃_t ≤ −x) ≤ e^{−x²/2}.
pub fn tail_lower_dk2(x: f64) -> Result<f64> {
    let x = nonnegative("tail_lower_dk2", x)?;
    Ok(dk2(x))
}

fn dk1(x: f64, params: &ExpFunParams, moments: &ExpFunMoments) -> f64 {
    let l = (x * moments.sigma_t / moments.m_t).ln_1p();
    (-l * l / (2.0 * params.t)).exp()
}

fn dk2(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

/// P(|F̃_t| > x) ≤ dk1(x) + dk2(x), clamped to 1.
pub(crate) fn abs_tail_bound(x: f64, params: &ExpFunParams, moments: &ExpFunMoments) -> f64 {
    (dk1(x, params, moments) + dk2(x)).min(1.0)
}

/// Bound on P(|F̃_t| > |z|/2).
pub fn two_sided_tail(z: f64, params: &ExpFunParams, moments: &ExpFunMoments) -> Result<f64> {
    finite("two_sided_tail", "z", z)?;
    Ok(abs_tail_bound(0.5 * z.abs(), params, moments))
}

/// 4t⁷e^{4at+8t}/σ_t⁴, the bound on E|1 − Γ_t|².
pub fn gamma_second_moment_upper(params: &ExpFunParams, moments: &ExpFunMoments) -> f64 {
    let t = params.t;
    let s2 = moments.sigma2_t;
    4.0 * t.powi(7) * (4.0 * params.a * t + 8.0 * t).exp() / (s2 * s2)
}

/// 2e^{2at+4t}t^{7/2}/σ_t², the square root of [`gamma_second_moment_upper`].
pub fn vnms_prefactor(params: &ExpFunParams, moments: &ExpFunMoments) -> f64 {
    let t = params.t;
    2.0 * (2.0 * params.a * t + 4.0 * t).exp() * t.powi(3) * t.sqrt() / moments.sigma2_t
}

/// Non-uniform bound on |P(F̃_t ≤ z) − Φ(z)|.
pub fn vnms_bound(params: &ExpFunParams, moments: &ExpFunMoments, z: f64) -> Result<f64> {
    finite("vnms_bound", "z", z)?;
    let t = params.t;
    let l = (z.abs() * moments.sigma_t / (2.0 * moments.m_t)).ln_1p();
    let shape = (-l * l / (4.0 * t)).exp() + (-z * z / 16.0).exp() + 2.0 * (-z * z / 4.0).exp();
    Ok(vnms_prefactor(params, moments) * shape)
}

//! Solution of the Stein equation f'(x) − x f(x) = 1{x ≤ z} − Φ(z).
//!
//! The closed form involves √(2π)e^{x²/2}Φ(x), which overflows long before
//! f_z itself gets large. Every branch here is rewritten so that the only
//! growing factor is the Mills ratio at a nonnegative argument, multiplied by
//! e^{(x²−z²)/2} with x² ≤ z² when it appears.

use serde::Serialize;

use crate::error::{finite, Error, Result};
use crate::gaussian::{cdf_unchecked, scaled_tail_unchecked, tail_unchecked, SQRT_2PI};

/// Additive slack used when checking the analytic estimates on a grid.
pub const LEMMA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// x ≤ z (closed side, also used at the seam)
    LowerBranch,
    /// x > z
    UpperBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinSolutionPoint {
    pub z: f64,
    pub x: f64,
    pub value: f64,
    pub derivative: f64,
    pub branch: Branch,
}

pub fn stein_solution(z: f64, x: f64) -> Result<SteinSolutionPoint> {
    finite("stein_solution", "z", z)?;
    finite("stein_solution", "x", x)?;
    Ok(stein_unchecked(z, x))
}

/// e^{(x−z)(x+z)/2} with the sum, difference and product carried in
/// double-word arithmetic.
fn exp_half_gap(x: f64, z: f64) -> f64 {
    let two_sum = |a: f64, b: f64| {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    };
    let (d, d_lo) = two_sum(x, -z);
    let (s, s_lo) = two_sum(x, z);
    let hi = d * s;
    let lo = d.mul_add(s, -hi) + d * s_lo + d_lo * s;
    (0.5 * hi).exp() * (1.0 + 0.5 * lo)
}

pub(crate) fn stein_unchecked(z: f64, x: f64) -> SteinSolutionPoint {
    let gap_factor = exp_half_gap(x, z);
    if x <= z {
        // √(2π)e^{x²/2}Φ(x)·(1 − Φ(z))
        let value = if x <= 0.0 {
            scaled_tail_unchecked(-x) * tail_unchecked(z)
        } else {
            cdf_unchecked(x) * scaled_tail_unchecked(z) * gap_factor
        };
        SteinSolutionPoint {
            z,
            x,
            value,
            derivative: x * value + tail_unchecked(z),
            branch: Branch::LowerBranch,
        }
    } else {
        // √(2π)e^{x²/2}(1 − Φ(x))·Φ(z)
        let value = if x >= 0.0 {
            scaled_tail_unchecked(x) * cdf_unchecked(z)
        } else {
            cdf_unchecked(-x) * scaled_tail_unchecked(-z) * gap_factor
        };
        SteinSolutionPoint {
            z,
            x,
            value,
            derivative: x * value - cdf_unchecked(z),
            branch: Branch::UpperBranch,
        }
    }
}

/// Slack of each estimate over the checked grid. Center entries are `None`
/// when no grid point falls in |x| ≤ z/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaMargins {
    pub global_value: f64,
    pub global_derivative: f64,
    pub center_value: Option<f64>,
    pub center_derivative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub z: f64,
    pub grid: Vec<f64>,
    /// 0 < f_z ≤ √(2π)/4 and |f'_z| ≤ 1 everywhere.
    pub global_bound_ok: bool,
    /// f_z ≤ (√(2π)/2)e^{−z²/4} on |x| ≤ z/2.
    pub center_value_ok: bool,
    /// |f'_z| ≤ 2e^{−z²/4} on |x| ≤ z/2.
    pub center_derivative_ok: bool,
    pub margins: LemmaMargins,
    pub worst_margin: f64,
}

impl LemmaReport {
    pub fn all_ok(&self) -> bool {
        self.global_bound_ok && self.center_value_ok && self.center_derivative_ok
    }
}

/// Upper bound on f_z over |x| ≤ z/2.
pub fn center_value_bound(z: f64) -> f64 {
    0.5 * SQRT_2PI * (-0.25 * z * z).exp()
}

/// Upper bound on |f'_z| over |x| ≤ z/2.
pub fn center_derivative_bound(z: f64) -> f64 {
    2.0 * (-0.25 * z * z).exp()
}

/// Evaluates f_z and f'_z over `grid` and checks the global and center
/// estimates. Only defined for z > 0; negative z is the reflected problem and
/// is not handled here.
pub fn check_lemma(z: f64, grid: &[f64]) -> Result<LemmaReport> {
    finite("check_lemma", "z", z)?;
    if z <= 0.0 {
        return Err(Error::domain("check_lemma", format!("requires z > 0, got {z}")));
    }
    if grid.is_empty() {
        return Err(Error::domain("check_lemma", "empty grid"));
    }
    for &x in grid {
        finite("check_lemma", "grid point", x)?;
    }

    let value_cap = 0.25 * SQRT_2PI;
    let center_value_cap = center_value_bound(z);
    let center_derivative_cap = center_derivative_bound(z);

    let mut m = LemmaMargins {
        global_value: f64::INFINITY,
        global_derivative: f64::INFINITY,
        center_value: None,
        center_derivative: None,
    };
    let mut positive = true;
    for &x in grid {
        let p = stein_unchecked(z, x);
        positive &= p.value > 0.0;
        m.global_value = m.global_value.min(value_cap - p.value);
        m.global_derivative = m.global_derivative.min(1.0 - p.derivative.abs());
        if x.abs() <= 0.5 * z {
            let cv = center_value_cap - p.value;
            let cd = center_derivative_cap - p.derivative.abs();
            m.center_value = Some(m.center_value.map_or(cv, |v| v.min(cv)));
            m.center_derivative = Some(m.center_derivative.map_or(cd, |v| v.min(cd)));
        }
    }

    let ok = |margin: f64| margin >= -LEMMA_SLACK;
    let global_bound_ok = positive && ok(m.global_value) && ok(m.global_derivative);
    let center_value_ok = m.center_value.is_none_or(ok);
    let center_derivative_ok = m.center_derivative.is_none_or(ok);
    let worst_margin = [
        Some(m.global_value),
        Some(m.global_derivative),
        m.center_value,
        m.center_derivative,
    ]
    .into_iter()
    .flatten()
    .fold(f64::INFINITY, f64::min);

    Ok(LemmaReport {
        z,
        grid: grid.to_vec(),
        global_bound_ok,
        center_value_ok,
        center_derivative_ok,
        margins: m,
        worst_margin,
    })
}

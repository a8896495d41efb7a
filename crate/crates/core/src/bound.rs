//! Non-uniform Berry-Esseen bounds
//!
//! ```text
//! |P(F ≤ z) − Φ(z)| ≤ (|E F| + d)·(√P(|F| > |z|/2) + 2e^{−z²/4})
//! ```
//!
//! with a pluggable model for the two-sided tail probability.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::chaos::discrepancy_factor;
use crate::empirical::EmpiricalCdf;
use crate::error::{finite, Error, Result};
use crate::expfun::{abs_tail_bound, ExpFunParams};

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Upper bound (or exact value) of P(|F| > x), x ≥ 0.
#[derive(Clone)]
pub enum TailModel {
    /// 1 − F(x) + F(−x) from a continuous distribution function.
    ExactCdf(CdfFn),
    /// E|F|^p / x^p
    Markov {
        p: f64,
        moment_p: f64,
    },
    /// c_q²·exp(−x^{2/q}/2) for a unit-variance q-th chaos.
    MajorChaos {
        q: u32,
        c_q: f64,
    },
    /// Upper plus lower concentration bound of the standardized exponential
    /// functional.
    ExpFunTwoSided(ExpFunParams),
    Empirical(Arc<EmpiricalCdf>),
    Unit,
}

impl fmt::Debug for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailModel::ExactCdf(_) => f.write_str("ExactCdf(..)"),
            TailModel::Markov { p, moment_p } => write!(f, "Markov {{ p: {p}, moment_p: {moment_p} }}"),
            TailModel::MajorChaos { q, c_q } => write!(f, "MajorChaos {{ q: {q}, c_q: {c_q} }}"),
            TailModel::ExpFunTwoSided(p) => write!(f, "ExpFunTwoSided({p:?})"),
            TailModel::Empirical(e) => write!(f, "Empirical(n = {})", e.len()),
            TailModel::Unit => f.write_str("Unit"),
        }
    }
}

impl TailModel {
    pub fn exact_cdf<F>(cdf: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TailModel::ExactCdf(Arc::new(cdf))
    }

    pub fn markov(p: f64, moment_p: f64) -> Result<Self> {
        finite("markov tail", "p", p)?;
        finite("markov tail", "moment", moment_p)?;
        if p <= 0.0 || moment_p < 0.0 {
            return Err(Error::domain(
                "markov tail",
                format!("needs p > 0 and moment >= 0, got p = {p}, moment = {moment_p}"),
            ));
        }
        Ok(TailModel::Markov { p, moment_p })
    }

    pub fn major_chaos(q: u32, c_q: f64) -> Result<Self> {
        finite("major tail", "c_q", c_q)?;
        if q < 2 || c_q <= 0.0 {
            return Err(Error::domain(
                "major tail",
                format!("needs q >= 2 and c_q > 0, got q = {q}, c_q = {c_q}"),
            ));
        }
        Ok(TailModel::MajorChaos { q, c_q })
    }

    pub fn name(&self) -> &'static str {
        match self {
            TailModel::ExactCdf(_) => "exact",
            TailModel::Markov { .. } => "markov",
            TailModel::MajorChaos { .. } => "major",
            TailModel::ExpFunTwoSided(_) => "expfun",
            TailModel::Empirical(_) => "empirical",
            TailModel::Unit => "unit",
        }
    }
}

/// P(|F| > x) under `model`, clamped to [0, 1].
pub fn tail_probability(model: &TailModel, x: f64) -> Result<f64> {
    finite("tail_probability", "x", x)?;
    if x < 0.0 {
        return Err(Error::domain("tail_probability", format!("requires x >= 0, got {x}")));
    }
    let p = match model {
        TailModel::ExactCdf(cdf) => 1.0 - cdf(x) + cdf(-x),
        TailModel::Markov { p, moment_p } => {
            if x == 0.0 {
                1.0
            } else {
                moment_p / x.powf(*p)
            }
        }
        TailModel::MajorChaos { q, c_q } => c_q * c_q * (-0.5 * x.powf(2.0 / *q as f64)).exp(),
        TailModel::ExpFunTwoSided(params) => abs_tail_bound(x, params, &params.moments()),
        TailModel::Empirical(ecdf) => ecdf.abs_tail(x),
        TailModel::Unit => 1.0,
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Where the Stein discrepancy came from. Does not change the arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiscrepancySource {
    /// √E|1 − ⟨DF, −DL⁻¹F⟩|²
    InnerProduct,
    /// √E|1 − ⟨DF, u⟩|² for F = E F + δ(u)
    Skorokhod,
    /// fourth-moment upper bound of a chaos
    FourthMoment,
    UserSupplied,
}

#[derive(Debug, Clone)]
pub struct BoundInputs {
    mean_abs: f64,
    stein_discrepancy: f64,
    tail: TailModel,
    source: DiscrepancySource,
}

impl BoundInputs {
    pub fn new(mean_abs: f64, stein_discrepancy: f64, tail: TailModel) -> Result<Self> {
        finite("bound inputs", "mean_abs", mean_abs)?;
        finite("bound inputs", "stein_discrepancy", stein_discrepancy)?;
        if mean_abs < 0.0 || stein_discrepancy < 0.0 {
            return Err(Error::domain(
                "bound inputs",
                format!("mean_abs and discrepancy must be >= 0, got {mean_abs}, {stein_discrepancy}"),
            ));
        }
        Ok(BoundInputs {
            mean_abs,
            stein_discrepancy,
            tail,
            source: DiscrepancySource::UserSupplied,
        })
    }

    pub fn with_source(mut self, source: DiscrepancySource) -> Self {
        self.source = source;
        self
    }

    pub fn mean_abs(&self) -> f64 {
        self.mean_abs
    }

    pub fn stein_discrepancy(&self) -> f64 {
        self.stein_discrepancy
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn source(&self) -> DiscrepancySource {
        self.source
    }

    fn prefactor(&self) -> f64 {
        self.mean_abs + self.stein_discrepancy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub z: f64,
    /// P(|F| > |z|/2) under the tail model
    pub tail_term: f64,
    /// 2e^{−z²/4}
    pub gaussian_term: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub rows: Vec<BoundRow>,
}

#[inline]
fn gaussian_term(z: f64) -> f64 {
    2.0 * (-0.25 * z * z).exp()
}

pub fn bound_row(inputs: &BoundInputs, z: f64) -> Result<BoundRow> {
    finite("nonuniform_bound", "z", z)?;
    let tail_term = tail_probability(&inputs.tail, 0.5 * z.abs())?;
    let g = gaussian_term(z);
    Ok(BoundRow {
        z,
        tail_term,
        gaussian_term: g,
        bound: inputs.prefactor() * (tail_term.sqrt() + g),
    })
}

/// (|E F| + d)·(√P(|F| > |z|/2) + 2e^{−z²/4})
pub fn nonuniform_bound(inputs: &BoundInputs, z: f64) -> Result<f64> {
    Ok(bound_row(inputs, z)?.bound)
}

/// Uniform baseline: the discrepancy d itself.
pub fn uniform_bound(inputs: &BoundInputs) -> f64 {
    inputs.stein_discrepancy
}

/// Bound for a unit-variance q-th chaos with fourth moment `fourth_moment`:
/// √((q−1)/(3q)(E F⁴ − 3))·(c_q e^{−|z|^{2/q}/2^{2+2/q}} + 2e^{−z²/4}).
pub fn chaos_bound(q: u32, fourth_moment: f64, c_q: f64, z: f64) -> Result<f64> {
    finite("chaos_bound", "fourth_moment", fourth_moment)?;
    finite("chaos_bound", "c_q", c_q)?;
    finite("chaos_bound", "z", z)?;
    if q < 2 {
        return Err(Error::domain("chaos_bound", format!("q must be >= 2, got {q}")));
    }
    if c_q <= 0.0 {
        return Err(Error::domain("chaos_bound", format!("c_q must be > 0, got {c_q}")));
    }
    if fourth_moment < 3.0 {
        return Err(Error::domain(
            "chaos_bound",
            format!("fourth moment {fourth_moment} < 3 is impossible for a unit-variance chaos of order >= 2"),
        ));
    }
    let d = (discrepancy_factor(q) * (fourth_moment - 3.0)).sqrt();
    let qf = q as f64;
    let tail = c_q * (-z.abs().powf(2.0 / qf) / 2f64.powf(2.0 + 2.0 / qf)).exp();
    Ok(d * (tail + gaussian_term(z)))
}

/// One row per grid point, in grid order.
pub fn evaluate_curve(inputs: &BoundInputs, grid: &[f64]) -> Result<BoundCurve> {
    if grid.is_empty() {
        return Err(Error::domain("evaluate_curve", "empty grid"));
    }
    let rows = grid
        .par_iter()
        .map(|&z| bound_row(inputs, z).map_err(|e| e.at(z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve { rows })
}

impl BoundCurve {
    /// Smallest |z| on the grid such that every row with |z'| ≥ |z| lies
    /// strictly below `baseline`.
    pub fn crossover_below(&self, baseline: f64) -> Option<f64> {
        let mut rows: Vec<&BoundRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.z.abs().total_cmp(&a.z.abs()));
        let mut best = None;
        let mut i = 0;
        while i < rows.len() {
            // rows sharing the same |z| must all be below
            let level = rows[i].z.abs();
            let mut j = i;
            let mut all_below = true;
            while j < rows.len() && rows[j].z.abs() == level {
                all_below &= rows[j].bound < baseline;
                j += 1;
            }
            if !all_below {
                break;
            }
            best = Some(level);
            i = j;
        }
        best
    }
}

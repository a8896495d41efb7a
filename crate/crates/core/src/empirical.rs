//! Empirical distribution functions and discrepancy certification.

use serde::Serialize;

use crate::bound::BoundCurve;
use crate::error::{Error, Result};
use crate::gaussian::cdf_unchecked;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("build_ecdf", "no samples"));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain("build_ecdf", format!("non-finite sample {bad}")));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_samples(&self) -> &[f64] {
        &self.sorted
    }

    /// #{samples ≤ z}
    pub fn count_le(&self, z: f64) -> usize {
        self.sorted.partition_point(|&v| v <= z)
    }

    /// #{samples < z}
    pub fn count_lt(&self, z: f64) -> usize {
        self.sorted.partition_point(|&v| v < z)
    }

    /// P̂(F ≤ z)
    pub fn eval(&self, z: f64) -> f64 {
        self.count_le(z) as f64 / self.len() as f64
    }

    /// P̂(|F| > x) for x ≥ 0.
    pub fn abs_tail(&self, x: f64) -> f64 {
        let x = x.abs();
        let above = self.len() - self.count_le(x);
        let below = self.count_lt(-x);
        (above + below) as f64 / self.len() as f64
    }
}

pub fn build_ecdf(samples: Vec<f64>) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(samples)
}

pub fn empirical_tail(ecdf: &EmpiricalCdf, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("empirical_tail", format!("requires x >= 0, got {x}")));
    }
    Ok(ecdf.abs_tail(x))
}

/// Half-width ε = √(ln(2/δ)/(2n)) of the DKW band at confidence 1 − δ.
pub fn dkw_epsilon(n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("dkw_epsilon", "n must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(
            "dkw_epsilon",
            format!("delta must lie in (0,1), got {delta}"),
        ));
    }
    Ok(((2.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Binomial standard error of a proportion, floored when p̂ ∈ {0, 1}.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    let n = n as f64;
    if p <= 0.0 || p >= 1.0 {
        (0.25 / n).sqrt() * 1e-3
    } else {
        (p * (1.0 - p) / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    pub z: f64,
    pub empirical_cdf: f64,
    pub normal_cdf: f64,
    pub discrepancy: f64,
    pub standard_error: f64,
    pub bound: Option<f64>,
    pub violated: bool,
}

/// |P̂(F ≤ z) − Φ(z)| at each grid point. Bounds are attached by [`certify`].
pub fn discrepancy_curve(ecdf: &EmpiricalCdf, grid: &[f64]) -> Vec<DiscrepancyRow> {
    let n = ecdf.len();
    grid.iter()
        .map(|&z| {
            let p = ecdf.eval(z);
            let phi = cdf_unchecked(z);
            DiscrepancyRow {
                z,
                empirical_cdf: p,
                normal_cdf: phi,
                discrepancy: (p - phi).abs(),
                standard_error: binomial_se(p, n),
                bound: None,
                violated: false,
            }
        })
        .collect()
}

/// Statistical allowance subtracted from the measured discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Slack {
    /// k binomial standard errors at each z.
    StandardErrors(f64),
    /// Uniform DKW half-width at confidence 1 − δ for n samples.
    Dkw { n: usize, delta: f64 },
}

impl Slack {
    fn amount(&self, row: &DiscrepancyRow) -> Result<f64> {
        match *self {
            Slack::StandardErrors(k) => Ok(k * row.standard_error),
            Slack::Dkw { n, delta } => dkw_epsilon(n, delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub rows: Vec<DiscrepancyRow>,
    pub slack: Slack,
    pub violations: usize,
    /// max over z of (discrepancy − slack)/bound.
    pub worst_ratio: f64,
    pub notes: Vec<String>,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// 0 when no z violates its bound, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }
}

/// Flags every z where the discrepancy exceeds the bound by more than the
/// slack.
pub fn certify(curve: &[DiscrepancyRow], bound_curve: &BoundCurve, slack: Slack) -> Result<CertifyReport> {
    if let Slack::StandardErrors(k) = slack {
        if k.is_nan() || k < 0.0 {
            return Err(Error::domain("certify", format!("slack k must be >= 0, got {k}")));
        }
    }
    if curve.len() != bound_curve.rows.len() {
        return Err(Error::GridMismatch(format!(
            "{} discrepancy rows vs {} bound rows",
            curve.len(),
            bound_curve.rows.len()
        )));
    }
    let mut rows = Vec::with_capacity(curve.len());
    let mut violations = 0;
    let mut worst_ratio = f64::NEG_INFINITY;
    for (row, b) in curve.iter().zip(&bound_curve.rows) {
        if row.z.to_bits() != b.z.to_bits() {
            return Err(Error::GridMismatch(format!("z = {} vs bound z = {}", row.z, b.z)));
        }
        let excess = row.discrepancy - slack.amount(row)?;
        let violated = excess > b.bound;
        violations += violated as usize;
        let ratio = if b.bound > 0.0 {
            excess / b.bound
        } else if excess > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst_ratio = worst_ratio.max(ratio);
        rows.push(DiscrepancyRow {
            bound: Some(b.bound),
            violated,
            ..row.clone()
        });
    }
    Ok(CertifyReport {
        rows,
        slack,
        violations,
        worst_ratio,
        notes: Vec::new(),
    })
}

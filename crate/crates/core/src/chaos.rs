//! Finite-rank multiple Wiener-Itô integrals with diagonal kernels.
//!
//! With orthonormal directions e₁..e_m and kernel f = Σ αᵢ eᵢ^{⊗q}, the
//! integral I_q(f) has the exact representation Σ αᵢ H_q(Nᵢ) with Nᵢ i.i.d.
//! standard normal and H_q the probabilists' Hermite polynomial.

use serde::Serialize;

use crate::error::{finite, Error, Result};
use crate::gaussian::tail_unchecked;
use crate::montecarlo::{mean_estimate, sample_vec, standard_normal, Estimate, Stream};

/// Probabilists' Hermite polynomial He_q(x) by the three-term recurrence.
pub fn hermite(q: u32, x: f64) -> f64 {
    match q {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..q {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalChaosSpec {
    q: u32,
    alphas: Vec<f64>,
}

impl DiagonalChaosSpec {
    pub fn new(q: u32, alphas: Vec<f64>) -> Result<Self> {
        if q < 2 {
            return Err(Error::domain("chaos spec", format!("order q must be >= 2, got {q}")));
        }
        if alphas.is_empty() {
            return Err(Error::domain("chaos spec", "no coefficients"));
        }
        for &a in &alphas {
            finite("chaos spec", "alpha", a)?;
        }
        if alphas.iter().all(|&a| a == 0.0) {
            return Err(Error::domain("chaos spec", "all coefficients are zero"));
        }
        Ok(DiagonalChaosSpec { q, alphas })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Var I_q(f) = q!·Σ αᵢ².
    pub fn variance(&self) -> f64 {
        factorial(self.q) * self.alphas.iter().map(|a| a * a).sum::<f64>()
    }

    /// Rescales to unit variance.
    pub fn normalize(&self) -> DiagonalChaosSpec {
        let s = self.variance().sqrt();
        DiagonalChaosSpec {
            q: self.q,
            alphas: self.alphas.iter().map(|a| a / s).collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.variance() - 1.0).abs() <= 1e-12
    }

    /// q = 2 with a single direction, the case with a closed-form law.
    pub fn is_q2_rank1(&self) -> bool {
        self.q == 2 && self.alphas.len() == 1
    }

    /// F for given values of the underlying normals (one per direction).
    pub fn evaluate(&self, normals: &[f64]) -> f64 {
        debug_assert_eq!(normals.len(), self.alphas.len());
        self.alphas
            .iter()
            .zip(normals)
            .map(|(a, &n)| a * hermite(self.q, n))
            .sum()
    }

    /// One draw of F; consumes exactly `alphas.len()` normal variates.
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        self.alphas
            .iter()
            .map(|a| a * hermite(self.q, standard_normal(rng)))
            .sum()
    }

    pub fn sample_many(&self, n: usize, seed: u64) -> Vec<f64> {
        sample_vec(n, seed, |rng| self.sample(rng))
    }
}

/// Exact E F^n for a second-chaos spec, through cumulants.
///
/// N² − 1 has cumulants κ_n = 2^{n−1}(n−1)! for n ≥ 2, so
/// κ_n(F) = 2^{n−1}(n−1)!·Σ αᵢⁿ and moments follow from the usual recursion.
pub fn moment_q2(spec: &DiagonalChaosSpec, n: u32) -> Result<f64> {
    if spec.q != 2 {
        return Err(Error::domain("moment_q2", "only defined for q = 2"));
    }
    let kappa = |k: u32| -> f64 {
        if k < 2 {
            return 0.0;
        }
        let power_sum: f64 = spec.alphas.iter().map(|a| a.powi(k as i32)).sum();
        2f64.powi(k as i32 - 1) * factorial(k - 1) * power_sum
    };
    let mut moments = vec![1.0];
    for m in 1..=n as usize {
        let mut acc = 0.0;
        for k in 1..=m {
            acc += binomial(m - 1, k - 1) * kappa(k as u32) * moments[m - k];
        }
        moments.push(acc);
    }
    Ok(moments[n as usize])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sizing for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McPlan {
    pub samples: usize,
    pub seed: u64,
}

/// E F⁴ of a unit-variance spec: exact for q = 2, Monte Carlo otherwise.
pub fn fourth_moment(spec: &DiagonalChaosSpec, mc: McPlan) -> Result<Estimate> {
    if !spec.is_normalized() {
        return Err(Error::domain(
            "fourth_moment",
            format!("spec must have variance one, has {}", spec.variance()),
        ));
    }
    if spec.q == 2 {
        let a2: f64 = spec.alphas.iter().map(|a| a * a).sum();
        let a4: f64 = spec.alphas.iter().map(|a| a.powi(4)).sum();
        let k2 = 2.0 * a2;
        let k4 = 48.0 * a4;
        return Ok(Estimate::exact(3.0 * k2 * k2 + k4));
    }
    if mc.samples < 2 {
        return Err(Error::domain("fourth_moment", "Monte Carlo needs at least 2 samples"));
    }
    Ok(fourth_moment_from_samples(&spec.sample_many(mc.samples, mc.seed)))
}

pub fn fourth_moment_from_samples(samples: &[f64]) -> Estimate {
    mean_estimate(samples, |x| {
        let x2 = x * x;
        x2 * x2
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyUpper {
    pub value: f64,
    /// The radicand was negative (Monte Carlo noise) and was clamped to zero.
    pub clamped: bool,
}

/// √((q−1)/(3q)·(E F⁴ − 3)), the fourth-moment bound on the Stein discrepancy
/// of a unit-variance q-th chaos.
pub fn stein_discrepancy_upper(q: u32, fourth_moment: f64) -> Result<DiscrepancyUpper> {
    finite("stein_discrepancy_upper", "fourth_moment", fourth_moment)?;
    if q < 2 {
        return Err(Error::domain("stein_discrepancy_upper", "q must be >= 2"));
    }
    let radicand = discrepancy_factor(q) * (fourth_moment - 3.0);
    if radicand < 0.0 {
        return Ok(DiscrepancyUpper {
            value: 0.0,
            clamped: true,
        });
    }
    Ok(DiscrepancyUpper {
        value: radicand.sqrt(),
        clamped: false,
    })
}

/// (q − 1)/(3q)
pub fn discrepancy_factor(q: u32) -> f64 {
    (q as f64 - 1.0) / (3.0 * q as f64)
}

/// Standard error of the discrepancy bound propagated from the fourth-moment
/// standard error (delta method).
pub fn discrepancy_standard_error(q: u32, fourth_moment: Estimate) -> f64 {
    let c = discrepancy_factor(q);
    let d = (c * (fourth_moment.value - 3.0)).max(0.0).sqrt();
    if d == 0.0 {
        return f64::INFINITY;
    }
    c * fourth_moment.standard_error / (2.0 * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosMoments {
    pub variance: f64,
    pub fourth_moment: Estimate,
    pub discrepancy_upper: f64,
    pub discrepancy_clamped: bool,
}

pub fn chaos_moments(spec: &DiagonalChaosSpec, mc: McPlan) -> Result<ChaosMoments> {
    let unit = spec.normalize();
    let m4 = fourth_moment(&unit, mc)?;
    let d = stein_discrepancy_upper(spec.q, m4.value)?;
    Ok(ChaosMoments {
        variance: spec.variance(),
        fourth_moment: m4,
        discrepancy_upper: d.value,
        discrepancy_clamped: d.clamped,
    })
}

/// P(F ≤ z) for F = (N² − 1)/√2.
pub fn exact_cdf_q2_rank1(z: f64) -> f64 {
    let floor = -std::f64::consts::FRAC_1_SQRT_2;
    if z.is_nan() || z < floor {
        return 0.0;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    let r = (1.0 + std::f64::consts::SQRT_2 * z).max(0.0).sqrt();
    1.0 - 2.0 * tail_unchecked(r)
}

/// P(|F| > x) for F = (N² − 1)/√2, x ≥ 0, without cancellation in the tail.
pub fn exact_abs_tail_q2_rank1(x: f64) -> f64 {
    let x = x.abs();
    let upper = 2.0 * tail_unchecked((1.0 + std::f64::consts::SQRT_2 * x).sqrt());
    let lower = if x < std::f64::consts::FRAC_1_SQRT_2 {
        exact_cdf_q2_rank1(-x)
    } else {
        0.0
    };
    (upper + lower).min(1.0)
}

/// Smallest c with p̂(x) ≤ c²·exp(−x^{2/q}/2) at every tested x, where p̂ is
/// the empirical two-sided tail of `samples`.
///
/// A diagnostic only: it says nothing about the true constant, which depends
/// on the whole law and not just the sampled range.
pub fn calibrate_major_constant(samples: &[f64], q: u32, xs: &[f64]) -> f64 {
    let mut abs: Vec<f64> = samples.iter().map(|s| s.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len() as f64;
    xs.iter()
        .map(|&x| {
            let above = abs.len() - abs.partition_point(|&v| v <= x);
            let p = above as f64 / n;
            (p * (0.5 * x.abs().powf(2.0 / q as f64)).exp()).sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::substream;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(2, 2.0), 3.0);
        assert_eq!(hermite(3, 0.0), 0.0);
        assert_eq!(hermite(4, 1.0), -2.0);
        assert_eq!(hermite(0, 7.0), 1.0);
        assert_eq!(hermite(1, 7.0), 7.0);
        // x⁵ − 10x³ + 15x
        assert!((hermite(5, 1.5) - (7.59375 - 33.75 + 22.5)).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(DiagonalChaosSpec::new(1, vec![1.0]).is_err());
        assert!(DiagonalChaosSpec::new(2, vec![]).is_err());
        assert!(DiagonalChaosSpec::new(2, vec![0.0, 0.0]).is_err());
        assert!(DiagonalChaosSpec::new(2, vec![f64::NAN]).is_err());
    }

    #[test]
    fn variances() {
        assert_eq!(DiagonalChaosSpec::new(2, vec![1.0]).unwrap().variance(), 2.0);
        assert_eq!(DiagonalChaosSpec::new(3, vec![1.0, 1.0]).unwrap().variance(), 12.0);
    }

    #[test]
    fn normalization() {
        let s = DiagonalChaosSpec::new(2, vec![1.0]).unwrap().normalize();
        assert!((s.alphas()[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        let s = DiagonalChaosSpec::new(2, vec![3.0, 4.0]).unwrap().normalize();
        let k = (50.0f64).sqrt();
        assert!((s.alphas()[0] - 3.0 / k).abs() < 1e-15);
        assert!((s.alphas()[1] - 4.0 / k).abs() < 1e-15);
        assert!((s.variance() - 1.0).abs() < 1e-14);
        assert_eq!(s.normalize(), s);
    }

    #[test]
    fn evaluate_forced_normals() {
        let s = DiagonalChaosSpec::new(2, vec![FRAC_1_SQRT_2]).unwrap();
        assert!((s.evaluate(&[0.0]) + FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.evaluate(&[1.0]), 0.0);
    }

    #[test]
    fn sample_consumes_one_normal_per_direction() {
        let s = DiagonalChaosSpec::new(3, vec![0.2, -0.1, 0.3]).unwrap();
        let mut a = substream(5, 0);
        let mut b = substream(5, 0);
        let f = s.sample(&mut a);
        let ns: Vec<f64> = (0..3).map(|_| standard_normal(&mut b)).collect();
        assert_eq!(f, s.evaluate(&ns));
        assert_eq!(standard_normal(&mut a), standard_normal(&mut b));
    }

    #[test]
    fn q2_fourth_moment_exact() {
        let s = DiagonalChaosSpec::new(2, vec![1.0]).unwrap().normalize();
        let plan = McPlan { samples: 0, seed: 0 };
        let m4 = fourth_moment(&s, plan).unwrap();
        assert!((m4.value - 15.0).abs() < 1e-13);
        assert_eq!(m4.standard_error, 0.0);
        // E F⁴ = 3 + 12/m for m equal directions
        for m in [1usize, 2, 10, 1000] {
            let s = DiagonalChaosSpec::new(2, vec![1.0; m]).unwrap().normalize();
            let v = fourth_moment(&s, plan).unwrap().value;
            assert!((v - (3.0 + 12.0 / m as f64)).abs() < 1e-12, "m={m} v={v}");
        }
    }

    #[test]
    fn fourth_moment_requires_unit_variance() {
        let s = DiagonalChaosSpec::new(2, vec![1.0]).unwrap();
        assert!(fourth_moment(&s, McPlan { samples: 10, seed: 0 }).is_err());
    }

    #[test]
    fn cumulant_moments_match_gaussian_moment_oracle() {
        // E (N²−1)^n / √2^n with E N^{2k} = (2k−1)!!
        let double_fact = |k: u32| (1..=k).map(|i| (2 * i - 1) as f64).product::<f64>();
        let s = DiagonalChaosSpec::new(2, vec![FRAC_1_SQRT_2]).unwrap();
        for n in 1..=8u32 {
            let direct: f64 = (0..=n)
                .map(|k| {
                    let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                    binomial(n as usize, k as usize) * sign * double_fact(k)
                })
                .sum::<f64>()
                / SQRT_2.powi(n as i32);
            let got = moment_q2(&s, n).unwrap();
            assert!((got - direct).abs() < 1e-9 * direct.abs().max(1.0), "n={n}");
        }
        assert!((moment_q2(&s, 6).unwrap() - 755.0).abs() < 1e-9);
        assert!((moment_q2(&s, 8).unwrap() - 74417.0).abs() < 1e-7);
    }

    #[test]
    fn discrepancy_upper_values() {
        let d = stein_discrepancy_upper(2, 15.0).unwrap();
        assert!((d.value - SQRT_2).abs() < 1e-15 && !d.clamped);
        assert_eq!(stein_discrepancy_upper(2, 3.0).unwrap().value, 0.0);
        let c = stein_discrepancy_upper(3, 2.9).unwrap();
        assert!(c.clamped && c.value == 0.0);
    }

    #[test]
    fn discrepancy_attained_in_rank_one_case() {
        // ⟨DF, −DL⁻¹F⟩ = N² for F = (N²−1)/√2, so E(1 − N²)² = E N⁴ − 2E N² + 1 = 2
        let direct = (3.0f64 - 2.0 + 1.0).sqrt();
        let d = stein_discrepancy_upper(2, 15.0).unwrap().value;
        assert!((d - direct).abs() < 1e-15);
    }

    #[test]
    fn exact_cdf_reference() {
        assert_eq!(exact_cdf_q2_rank1(-FRAC_1_SQRT_2), 0.0);
        assert_eq!(exact_cdf_q2_rank1(-3.0), 0.0);
        assert!((exact_cdf_q2_rank1(0.0) - 0.682_689_492_137_085_9).abs() < 1e-15);
        assert_eq!(exact_cdf_q2_rank1(f64::INFINITY), 1.0);
        assert!(exact_cdf_q2_rank1(1e6) > 1.0 - 1e-15);
        let mut prev = 0.0;
        for i in 0..2000 {
            let v = exact_cdf_q2_rank1(-1.0 + i as f64 * 0.01);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn exact_abs_tail_reference() {
        assert!((exact_abs_tail_q2_rank1(2.0) - 0.050_390_198_494_323_59).abs() < 1e-15);
        assert_eq!(exact_abs_tail_q2_rank1(0.0), 1.0);
        for i in 0..500 {
            let x = i as f64 * 0.02;
            let via_cdf = 1.0 - exact_cdf_q2_rank1(x) + exact_cdf_q2_rank1(-x);
            assert!((exact_abs_tail_q2_rank1(x) - via_cdf).abs() < 1e-14);
        }
    }

    #[test]
    fn major_calibration_diagnostic() {
        let s = DiagonalChaosSpec::new(2, vec![1.0]).unwrap().normalize();
        let xs: Vec<f64> = (0..=16).map(|i| i as f64 * 0.5).collect();
        let samples = s.sample_many(100_000, 17);
        let c = calibrate_major_constant(&samples, 2, &xs);
        assert!(c.is_finite() && c >= 1.0);
        let ok = xs.iter().all(|&x| {
            let p = samples.iter().filter(|v| v.abs() > x).count() as f64 / samples.len() as f64;
            p <= c * c * (-0.5 * x).exp() * (1.0 + 1e-12)
        });
        assert!(ok);
    }
}

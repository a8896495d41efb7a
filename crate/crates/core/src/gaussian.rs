//! Standard normal density, distribution and tail functions.
//!
//! The tail and the scaled tail (Mills ratio) are evaluated without forming
//! `1 - Φ(x)` by subtraction, so they keep full relative accuracy far into the
//! upper tail. `scaled_tail` is the kernel the Stein solution is built from.

use crate::error::{finite, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Switch point between the erfc product and the continued fraction in
/// [`scaled_tail`].
const MILLS_CF_FROM: f64 = 8.0;

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), accurate to a few ulps over the whole real line.
pub fn normal_cdf(x: f64) -> Result<f64> {
    finite("normal_cdf", "x", x)?;
    Ok(cdf_unchecked(x))
}

/// 1 − Φ(x) with small relative error in the upper tail.
pub fn normal_tail(x: f64) -> Result<f64> {
    finite("normal_tail", "x", x)?;
    Ok(tail_unchecked(x))
}

/// √(2π)·e^{x²/2}·(1 − Φ(x)), i.e. the Mills ratio (1 − Φ(x))/φ(x).
///
/// Finite for every x ≥ 0 and decays like 1/x. For negative arguments the
/// value grows like √(2π)e^{x²/2} and exceeds the f64 range below roughly
/// x = −37.7, where `+inf` is returned.
pub fn scaled_tail(x: f64) -> Result<f64> {
    finite("scaled_tail", "x", x)?;
    Ok(scaled_tail_unchecked(x))
}

/// 1/√2 − FRAC_1_SQRT_2
const FRAC_1_SQRT_2_LO: f64 = -4.833_646_656_726_457e-17;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

#[inline]
pub(crate) fn cdf_unchecked(x: f64) -> f64 {
    tail_unchecked(-x)
}

/// erfc(x/√2)/2 with a first-order correction for the rounding of x/√2,
/// which the tail would otherwise amplify by a factor of about x².
pub(crate) fn tail_unchecked(x: f64) -> f64 {
    let u = x * std::f64::consts::FRAC_1_SQRT_2;
    let du = x.mul_add(std::f64::consts::FRAC_1_SQRT_2, -u) + x * FRAC_1_SQRT_2_LO;
    let base = 0.5 * libm::erfc(u);
    if du == 0.0 || u.abs() > 27.0 {
        return base;
    }
    base - du * FRAC_1_SQRT_PI * (-u * u).exp()
}

/// e^{x²/2} with x² split exactly into hi + lo.
#[inline]
pub(crate) fn exp_half_square(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    (0.5 * hi).exp() * (1.0 + 0.5 * lo)
}

pub(crate) fn scaled_tail_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        SQRT_2PI * exp_half_square(x) * cdf_unchecked(-x)
    } else if x < MILLS_CF_FROM {
        SQRT_2PI * exp_half_square(x) * tail_unchecked(x)
    } else {
        mills_continued_fraction(x)
    }
}

/// R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))) by the modified Lentz method.
fn mills_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    1.0 / f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        assert_eq!(normal_cdf(40.0).unwrap(), 1.0);
        assert!((normal_cdf(1.0).unwrap() - 0.841_344_746_068_542_9).abs() <= 1e-15);
    }

    #[test]
    fn cdf_symmetry() {
        for i in -800..=800 {
            let x = i as f64 * 0.01;
            let s = normal_cdf(x).unwrap() + normal_cdf(-x).unwrap();
            assert!((s - 1.0).abs() <= 1e-15, "x={x} sum={s}");
        }
    }

    #[test]
    fn cdf_monotone() {
        let mut prev = 0.0;
        for i in -4000..=4000 {
            let v = normal_cdf(i as f64 * 0.01).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn tail_values() {
        assert_eq!(normal_tail(0.0).unwrap(), 0.5);
        let t2 = normal_tail(2.0).unwrap();
        assert!(rel(t2, 0.022_750_131_948_179_207) < 1e-14);
        assert!(t2 <= 0.5 * (-2.0f64).exp());
        let t30 = normal_tail(30.0).unwrap();
        assert!(t30 > 0.0 && t30 < 1e-100);
        assert!(rel(t30, 4.906_713_927_148_187e-198) < 1e-12);
    }

    #[test]
    fn scaled_tail_values() {
        assert!(rel(scaled_tail(0.0).unwrap(), SQRT_2PI / 2.0) < 1e-15);
        assert!(rel(scaled_tail(100.0).unwrap(), 0.009_999_000_299_850_105) < 1e-14);
        assert!(rel(scaled_tail(40.0).unwrap(), 0.024_984_404_205_720_571) < 1e-14);
        assert!(rel(scaled_tail(-2.0).unwrap(), 18.100_247_711_126_153) < 1e-14);
    }

    #[test]
    fn scaled_tail_branches_agree_at_switch() {
        let x = MILLS_CF_FROM;
        let direct = SQRT_2PI * (0.5 * x * x).exp() * tail_unchecked(x);
        assert!(rel(mills_continued_fraction(x), direct) < 1e-13);
        let below = scaled_tail(x - 1e-12).unwrap();
        assert!(rel(below, scaled_tail(x).unwrap()) < 1e-12);
    }

    #[test]
    fn scaled_tail_asymptote() {
        for &x in &[1e3, 1e5, 1e8] {
            assert!((scaled_tail(x).unwrap() * x - 1.0).abs() < 2.0 / (x * x));
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(normal_cdf(f64::NAN).is_err());
        assert!(normal_tail(f64::INFINITY).is_err());
        assert!(scaled_tail(f64::NEG_INFINITY).is_err());
    }
}

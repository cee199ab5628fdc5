//! Standard-normal density and distribution function.
//!
//! The distribution function goes through `erfc`, which keeps full relative
//! precision in the lower tail where `1 - erf` would cancel. Beyond
//! `|x| > CDF_CLAMP` the result is clamped to exactly 0 or 1.

use crate::error::{Error, Result};

/// 1/sqrt(2*pi), the density at the origin.
pub const PHI_0: f64 = 0.398_942_280_401_432_7;

/// Arguments beyond this magnitude produce an exact 0 or 1 from the CDF.
pub const CDF_CLAMP: f64 = 38.0;

/// Standard normal density. Propagates NaN; see [`std_normal_pdf`] for the checked form.
#[inline]
pub fn pdf(x: f64) -> f64 {
    PHI_0 * (-0.5 * x * x).exp()
}

/// Standard normal distribution function. Propagates NaN.
#[inline]
pub fn cdf(x: f64) -> f64 {
    if x > CDF_CLAMP {
        1.0
    } else if x < -CDF_CLAMP {
        0.0
    } else {
        0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// Derivative of the density, `-x * pdf(x)`.
#[inline]
pub fn pdf_prime(x: f64) -> f64 {
    -x * pdf(x)
}

pub fn std_normal_pdf(x: f64) -> Result<f64> {
    ensure_finite("std_normal_pdf", x)?;
    Ok(pdf(x))
}

pub fn std_normal_cdf(x: f64) -> Result<f64> {
    ensure_finite("std_normal_cdf", x)?;
    Ok(cdf(x))
}

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson rule; test-only oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n % 2 == 1 { n + 1 } else { n };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let x = a + k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
        h * (0.5 * (f(a) + f(b)) + inner)
    }

    fn density(t: f64) -> f64 {
        (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn pdf_at_origin() {
        assert_eq!(std_normal_pdf(0.0).unwrap(), 0.3989422804014327);
    }

    #[test]
    fn pdf_symmetric() {
        assert_eq!(pdf(1.0), pdf(-1.0));
    }

    #[test]
    fn pdf_matches_tail_moment_quadrature() {
        // int_x^inf t phi(t) dt = phi(x)
        let q = simpson(|t| t * density(t), 2.5, 40.0, 200_000);
        assert!((pdf(2.5) - q).abs() < 1e-12, "{} vs {}", pdf(2.5), q);
    }

    #[test]
    fn cdf_anchor_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((1.0 - std_normal_cdf(8.0).unwrap()).abs() < 1e-15);
        assert_eq!(cdf(39.0), 1.0);
        assert_eq!(cdf(-39.0), 0.0);
    }

    #[test]
    fn cdf_quarter_matches_trapezoid() {
        let oracle = trapezoid(density, -12.0, 0.25, 400_000);
        let got = std_normal_cdf(0.25).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        assert!((got - 0.5987063256829237).abs() < 1e-15);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(std_normal_pdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        assert!(std_normal_cdf(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn lower_tail_keeps_relative_precision() {
        // Mills-ratio asymptote: Phi(-x) ~ phi(x)/x (1 - 1/x^2 + 3/x^4)
        let x: f64 = 20.0;
        let approx = pdf(x) / x * (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4) - 15.0 / x.powi(6));
        assert!(((cdf(-x) - approx) / approx).abs() < 1e-7);
    }

    #[test]
    fn derivative_matches_density_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(-8.0..8.0);
            let fd = (cdf(x + h) - cdf(x - h)) / (2.0 * h);
            assert!((fd - pdf(x)).abs() < 1e-8, "x = {x}");
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reflection(x in -8.0f64..8.0) {
                prop_assert!((cdf(x) + cdf(-x) - 1.0).abs() < 1e-14);
            }

            #[test]
            fn monotone(a in -8.0f64..8.0, b in -8.0f64..8.0) {
                prop_assume!((a - b).abs() > 1e-9);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                // The upper tail saturates at 1 in double precision.
                if hi <= 0.0 {
                    prop_assert!(cdf(lo) < cdf(hi));
                } else {
                    prop_assert!(cdf(lo) <= cdf(hi));
                }
            }

            #[test]
            fn cdf_in_open_unit_interval(x in -8.0f64..8.0) {
                let p = cdf(x);
                prop_assert!(p > 0.0 && p < 1.0);
            }
        }
    }
}

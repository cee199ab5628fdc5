//! Analytic first and second derivatives of the party objectives with respect
//! to their own platforms, the symmetric-profile first-order conditions, and
//! implicit-function comparative statics in `w`.
//!
//! With `n = sqrt(sigma_v^2 + 4 w^2 sigma_i^2)` and `kappa` the win margin:
//!
//! ```text
//! dE[pi_L]/dp_L = (1 - 2p_L) phi(kappa) (p_R^2 - p_L^2 + V + w) / n - 2 p_L Phi(kappa)
//! dE[pi_R]/dp_R = -(2p_R - 1) phi(kappa) (V + w + (1-p_L)^2 - (1-p_R)^2) / n + 2 (1 - p_R)(1 - Phi(kappa))
//! ```

use crate::error::{Error, Result};
use crate::gaussmath::{cdf, pdf, pdf_prime, PHI_0};
use crate::model::{noise_scale, win_margin, ModelParams, Party, PlatformPair};

/// Largest `|FOC|` at which a point still counts as a root for the
/// implicit-function formulas.
pub const ROOT_TOLERANCE: f64 = 1e-8;

/// Derivative of a party's expected utility with respect to its own platform.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FocValue(pub f64);

/// Second derivative of a party's expected utility with respect to its own platform.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SocValue(pub f64);

impl FocValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl SocValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which single source of uncertainty survives in a polar case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polar {
    /// `sigma_i -> 0`: only valence is uncertain.
    ValenceOnly,
    /// `sigma_v -> 0`: only the voter's ideology is uncertain.
    IdeologyOnly,
}

pub fn d_eu_l_d_pl(pp: PlatformPair, params: &ModelParams) -> FocValue {
    let n = noise_scale(params).0;
    let k = win_margin(pp, params);
    let (pl, pr) = (pp.p_l, pp.p_r);
    let stake = pr * pr - pl * pl + params.office_rent() + params.w();
    FocValue((1.0 - 2.0 * pl) * pdf(k) * stake / n - 2.0 * pl * cdf(k))
}

pub fn d_eu_r_d_pr(pp: PlatformPair, params: &ModelParams) -> FocValue {
    let n = noise_scale(params).0;
    let k = win_margin(pp, params);
    let (pl, pr) = (pp.p_l, pp.p_r);
    let stake = params.office_rent() + params.w() + (1.0 - pl).powi(2) - (1.0 - pr).powi(2);
    FocValue(-(2.0 * pr - 1.0) * pdf(k) * stake / n + 2.0 * (1.0 - pr) * (1.0 - cdf(k)))
}

pub fn d2_eu_l_d_pl2(pp: PlatformPair, params: &ModelParams) -> SocValue {
    let n = noise_scale(params).0;
    let k = win_margin(pp, params);
    let (pl, pr) = (pp.p_l, pp.p_r);
    let v_w = params.office_rent() + params.w();
    let lean = 1.0 - 2.0 * pl;
    let curvature = lean * lean * pdf_prime(k) * (pr * pr - pl * pl + v_w) / (n * n);
    let slope = 2.0 * pdf(k) * ((2.0 - 5.0 * pl) * pl + pr * pr + v_w) / n;
    SocValue(curvature - slope - 2.0 * cdf(k))
}

pub fn d2_eu_r_d_pr2(pp: PlatformPair, params: &ModelParams) -> SocValue {
    let n = noise_scale(params).0;
    let k = win_margin(pp, params);
    let (pl, pr) = (pp.p_l, pp.p_r);
    let v_w = params.office_rent() + params.w();
    let lean = 1.0 - 2.0 * pr;
    let stake = (pl - 2.0) * pl - (pr - 2.0) * pr + v_w;
    let curvature = -lean * lean * pdf_prime(k) * stake / (n * n);
    let slope = 2.0 * pdf(k) * ((pl - 2.0) * pl + (8.0 - 5.0 * pr) * pr + v_w - 2.0) / n;
    SocValue(curvature - slope - 2.0 * (1.0 - cdf(k)))
}

pub fn own_foc(party: Party, pp: PlatformPair, params: &ModelParams) -> FocValue {
    match party {
        Party::L => d_eu_l_d_pl(pp, params),
        Party::R => d_eu_r_d_pr(pp, params),
    }
}

pub fn own_soc(party: Party, pp: PlatformPair, params: &ModelParams) -> SocValue {
    match party {
        Party::L => d2_eu_l_d_pl2(pp, params),
        Party::R => d2_eu_r_d_pr2(pp, params),
    }
}

/// Party `L`'s first-order condition on the profile `(p_L, 1 - p_L)` with the
/// win margin at zero: `(1 - 2p) phi(0) (V + w + 1 - 2p) / n - p`.
///
/// Meaningful on `[0, 1/2]`, where it is positive at 0 and equal to `-1/2` at `1/2`.
pub fn foc_symmetric(p_l: f64, params: &ModelParams) -> FocValue {
    symmetric_foc_with_scale(p_l, params, noise_scale(params).0)
}

/// Limit of [`foc_symmetric`] as `sigma_i -> 0`.
pub fn foc_symmetric_valence_only(p_l: f64, params: &ModelParams) -> FocValue {
    symmetric_foc_with_scale(p_l, params, params.sigma_v())
}

/// Limit of [`foc_symmetric`] as `sigma_v -> 0`. Singular at `w = 0`.
pub fn foc_symmetric_ideology_only(p_l: f64, params: &ModelParams) -> Result<FocValue> {
    if params.w() <= 0.0 {
        return Err(Error::Domain(
            "ideology-only condition is singular at w = 0 (limit platform is 1/2)".into(),
        ));
    }
    Ok(symmetric_foc_with_scale(
        p_l,
        params,
        2.0 * params.sigma_i() * params.w(),
    ))
}

pub fn foc_symmetric_polar(p_l: f64, params: &ModelParams, which: Polar) -> Result<FocValue> {
    match which {
        Polar::ValenceOnly => Ok(foc_symmetric_valence_only(p_l, params)),
        Polar::IdeologyOnly => foc_symmetric_ideology_only(p_l, params),
    }
}

fn symmetric_foc_with_scale(p_l: f64, params: &ModelParams, scale: f64) -> FocValue {
    let lean = 1.0 - 2.0 * p_l;
    FocValue(lean * PHI_0 * (params.office_rent() + params.w() + lean) / scale - p_l)
}

fn require_root(residual: f64) -> Result<()> {
    if residual.abs() > ROOT_TOLERANCE || !residual.is_finite() {
        return Err(Error::NotARoot {
            residual: residual.abs(),
            tolerance: ROOT_TOLERANCE,
        });
    }
    Ok(())
}

/// Slope of the symmetric equilibrium platform in `w`, by the implicit function theorem:
///
/// ```text
/// (1-2p) phi(0) (4 sigma_i^2 w (2p - V - 1) + sigma_v^2)
/// -------------------------------------------------------------------
/// n^2 (2 phi(0) (V + w + 2(1 - 2p)) + n)
/// ```
///
/// `p_l` must be a root of [`foc_symmetric`] to within [`ROOT_TOLERANCE`].
pub fn dpl_dw_symmetric(p_l: f64, params: &ModelParams) -> Result<f64> {
    require_root(foc_symmetric(p_l, params).0)?;
    let n = noise_scale(params).0;
    let (v, w) = (params.office_rent(), params.w());
    let si2 = params.sigma_i() * params.sigma_i();
    let sv2 = params.sigma_v() * params.sigma_v();
    let lean = 1.0 - 2.0 * p_l;
    let num = lean * PHI_0 * (4.0 * si2 * w * (2.0 * p_l - v - 1.0) + sv2);
    let den = n * n * (2.0 * PHI_0 * (v + w + 2.0 * lean) + n);
    Ok(num / den)
}

/// The `w` below which the symmetric platform still moves outward:
/// `sigma_v^2 / (4 sigma_i^2 (1 + V - 2p))`. [`dpl_dw_symmetric`] is positive
/// iff `w` is below this value.
pub fn slope_sign_threshold(p_l: f64, params: &ModelParams) -> f64 {
    let si2 = params.sigma_i() * params.sigma_i();
    params.sigma_v().powi(2) / (4.0 * si2 * (1.0 + params.office_rent() - 2.0 * p_l))
}

/// Implicit-function slope in the two polar cases. `p_l` must solve the
/// matching polar first-order condition.
pub fn dpl_dw_polar(p_l: f64, params: &ModelParams, which: Polar) -> Result<f64> {
    require_root(foc_symmetric_polar(p_l, params, which)?.0)?;
    let (v, w) = (params.office_rent(), params.w());
    let lean = 1.0 - 2.0 * p_l;
    let inner = v + w + 2.0 * lean;
    Ok(match which {
        Polar::ValenceOnly => lean * PHI_0 / (2.0 * PHI_0 * inner + params.sigma_v()),
        Polar::IdeologyOnly => {
            -lean * (v + lean) * PHI_0 / (2.0 * w * (PHI_0 * inner + params.sigma_i() * w))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{expected_utility_l, expected_utility_r};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(w: f64, v: f64, si: f64, sv: f64, mi: f64, mv: f64) -> ModelParams {
        ModelParams::new(w, v, si, sv, mi, mv).unwrap()
    }

    // Plain bisection kept here so the tests do not lean on the solver module.
    fn root(f: impl Fn(f64) -> f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 0.5);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn second(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-4;
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h)
    }

    #[test]
    fn foc_positive_at_zero() {
        let p = params(0.6, 1.3, 0.8, 0.9, 0.5, 0.0);
        for pr in [0.55, 0.7, 0.85, 0.99] {
            assert!(d_eu_l_d_pl(PlatformPair::new(0.0, pr), &p).0 > 0.0);
        }
    }

    #[test]
    fn foc_at_center_is_minus_half() {
        let p = params(0.6, 1.3, 0.8, 0.9, 0.5, 0.0);
        let v = d_eu_l_d_pl(PlatformPair::symmetric(0.5), &p).0;
        assert!((v + 0.5).abs() < 1e-15);
        assert!((foc_symmetric(0.5, &p).0 + 0.5).abs() < 1e-15);
        assert!((foc_symmetric_valence_only(0.5, &p).0 + 0.5).abs() < 1e-15);
        assert!((foc_symmetric_ideology_only(0.5, &p).unwrap().0 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn first_derivatives_match_finite_differences_at_reference_point() {
        let p = params(1.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        let pp = PlatformPair::new(0.3, 0.7);
        let fd_l = central(
            |x| expected_utility_l(PlatformPair::new(x, pp.p_r), &p),
            pp.p_l,
        );
        let fd_r = central(
            |x| expected_utility_r(PlatformPair::new(pp.p_l, x), &p),
            pp.p_r,
        );
        assert!((d_eu_l_d_pl(pp, &p).0 - fd_l).abs() < 1e-6);
        assert!((d_eu_r_d_pr(pp, &p).0 - fd_r).abs() < 1e-6);
    }

    #[test]
    fn second_derivatives_match_five_point_stencil() {
        let p = params(1.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        let pp = PlatformPair::new(0.25, 0.75);
        let fd_l = second(
            |x| expected_utility_l(PlatformPair::new(x, pp.p_r), &p),
            pp.p_l,
        );
        let fd_r = second(
            |x| expected_utility_r(PlatformPair::new(pp.p_l, x), &p),
            pp.p_r,
        );
        assert!((d2_eu_l_d_pl2(pp, &p).0 - fd_l).abs() < 1e-4);
        assert!((d2_eu_r_d_pr2(pp, &p).0 - fd_r).abs() < 1e-4);
    }

    #[test]
    fn large_valence_noise_gives_global_concavity_on_box() {
        let p = params(1.0, 1.0, 1.0, 10.0, 0.5, 0.0);
        for i in 0..=50 {
            for j in 0..=50 {
                let pp = PlatformPair::new(0.5 * i as f64 / 50.0, 0.5 + 0.5 * j as f64 / 50.0);
                assert!(d2_eu_l_d_pl2(pp, &p).0 < 0.0);
                assert!(d2_eu_r_d_pr2(pp, &p).0 < 0.0);
            }
        }
    }

    #[test]
    fn symmetric_foc_examples() {
        let p = params(0.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        assert!((foc_symmetric(0.0, &p).0 - 2.0 * PHI_0).abs() < 1e-15);
        assert!((foc_symmetric(0.0, &p).0 - 0.7978845608028654).abs() < 1e-15);
        let r = root(|x| foc_symmetric(x, &p).0);
        // Closed form for w = 0: 1 - 2p = Delta(0).
        let disc = (1.0 + 4.0 * PHI_0 * PHI_0 + 12.0 * PHI_0).sqrt();
        let delta0 = (disc - 2.0 * PHI_0 - 1.0) / (4.0 * PHI_0);
        assert!((1.0 - 2.0 * r - delta0).abs() < 1e-12);
        assert!((r - 0.2691827215728084).abs() < 1e-12, "{r}");
    }

    #[test]
    fn polar_limits_agree_with_general_condition() {
        let tiny = 1e-300;
        let pv = params(0.7, 1.2, tiny, 0.8, 0.5, 0.0);
        let pi = params(0.7, 1.2, 0.8, tiny, 0.5, 0.0);
        for k in 0..=20 {
            let x = 0.5 * k as f64 / 20.0;
            assert!((foc_symmetric(x, &pv).0 - foc_symmetric_valence_only(x, &pv).0).abs() < 1e-14);
            let a = foc_symmetric(x, &pi).0;
            let b = foc_symmetric_ideology_only(x, &pi).unwrap().0;
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ideology_only_rejects_zero_w() {
        let p = params(0.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        assert!(foc_symmetric_ideology_only(0.2, &p).is_err());
        assert!(dpl_dw_polar(0.2, &p, Polar::IdeologyOnly).is_err());
    }

    #[test]
    fn polar_roots_move_in_opposite_directions() {
        let base = params(0.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        let at = |w: f64| base.with_w(w).unwrap();
        let v0 = root(|x| foc_symmetric_valence_only(x, &at(0.0)).0);
        let v1 = root(|x| foc_symmetric_valence_only(x, &at(0.5)).0);
        assert!(v1 > v0);
        let i1 = root(|x| foc_symmetric_ideology_only(x, &at(1.0)).unwrap().0);
        let i2 = root(|x| foc_symmetric_ideology_only(x, &at(2.0)).unwrap().0);
        assert!(i2 < i1);
    }

    #[test]
    fn polar_slopes_have_proven_signs_and_match_resolves() {
        let base = params(0.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        let h = 1e-4;
        for &w in &[0.2, 0.8, 1.5, 3.0] {
            for which in [Polar::ValenceOnly, Polar::IdeologyOnly] {
                let solve = |w: f64| {
                    let q = base.with_w(w).unwrap();
                    root(|x| foc_symmetric_polar(x, &q, which).unwrap().0)
                };
                let p = solve(w);
                let q = base.with_w(w).unwrap();
                let slope = dpl_dw_polar(p, &q, which).unwrap();
                match which {
                    Polar::ValenceOnly => assert!(slope > 0.0),
                    Polar::IdeologyOnly => assert!(slope < 0.0),
                }
                let fd = (solve(w + h) - solve(w - h)) / (2.0 * h);
                assert!(
                    (slope - fd).abs() < 1e-5,
                    "{which:?} w={w}: {slope} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn symmetric_slope_examples() {
        let base = params(0.0, 1.0, 1.0, 1.0, 0.5, 0.0);
        let p0 = root(|x| foc_symmetric(x, &base).0);
        let at_zero = dpl_dw_symmetric(p0, &base).unwrap();
        let lean = 1.0 - 2.0 * p0;
        let reduced = lean * PHI_0 / (2.0 * (2.0 * lean + 1.0) * PHI_0 + 1.0);
        assert!(at_zero > 0.0);
        assert!((at_zero - reduced).abs() < 1e-14);

        let big = base.with_w(50.0).unwrap();
        let p50 = root(|x| foc_symmetric(x, &big).0);
        assert!(dpl_dw_symmetric(p50, &big).unwrap() < 0.0);

        assert!(matches!(
            dpl_dw_symmetric(0.1, &base),
            Err(Error::NotARoot { .. })
        ));
    }

    #[test]
    fn symmetric_slope_matches_resolve_and_threshold() {
        let base = params(0.0, 1.3, 0.7, 0.9, 0.5, 0.0);
        let solve = |w: f64| {
            let q = base.with_w(w).unwrap();
            root(|x| foc_symmetric(x, &q).0)
        };
        let h = 1e-4;
        for k in 1..40 {
            let w = 0.05 * k as f64;
            let q = base.with_w(w).unwrap();
            let p = solve(w);
            let slope = dpl_dw_symmetric(p, &q).unwrap();
            let fd = (solve(w + h) - solve(w - h)) / (2.0 * h);
            assert!((slope - fd).abs() < 1e-5);
            let below = w < slope_sign_threshold(p, &q);
            assert_eq!(slope > 0.0, below, "w = {w}");
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = params(
                rng.random_range(0.0..3.0),
                rng.random_range(0.1..5.0),
                rng.random_range(0.2..3.0),
                rng.random_range(0.15..3.0),
                rng.random_range(0.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let pp = PlatformPair::new(rng.random_range(0.05..0.45), rng.random_range(0.55..0.95));
            let fl = |x: f64| expected_utility_l(PlatformPair::new(x, pp.p_r), &p);
            let fr = |x: f64| expected_utility_r(PlatformPair::new(pp.p_l, x), &p);
            let (a, b) = (d_eu_l_d_pl(pp, &p).0, central(fl, pp.p_l));
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
            let (a, b) = (d_eu_r_d_pr(pp, &p).0, central(fr, pp.p_r));
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
            let (a, b) = (d2_eu_l_d_pl2(pp, &p).0, second(fl, pp.p_l));
            assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0));
            let (a, b) = (d2_eu_r_d_pr2(pp, &p).0, second(fr, pp.p_r));
            assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn on_locus() -> impl Strategy<Value = ModelParams> {
            (
                0.0..3.0f64,
                0.1..5.0f64,
                0.1..3.0f64,
                0.1..3.0f64,
                -0.5..1.5f64,
            )
                .prop_map(|(w, v, si, sv, mi)| {
                    ModelParams::new(w, v, si, sv, mi, w * (1.0 - 2.0 * mi)).unwrap()
                })
        }

        proptest! {
            #[test]
            fn symmetric_condition_is_general_condition_on_locus(p in on_locus(), x in 0.0..0.5f64) {
                let general = d_eu_l_d_pl(PlatformPair::symmetric(x), &p).0;
                prop_assert!((general - foc_symmetric(x, &p).0).abs() < 1e-12);
            }

            #[test]
            fn conditions_are_antisymmetric_on_locus(p in on_locus(), x in 0.0..0.5f64) {
                let pp = PlatformPair::symmetric(x);
                prop_assert!((d_eu_l_d_pl(pp, &p).0 + d_eu_r_d_pr(pp, &p).0).abs() < 1e-12);
            }

            #[test]
            fn bracket_signs(p in on_locus()) {
                prop_assert!(foc_symmetric(0.0, &p).0 > 0.0);
                prop_assert!((foc_symmetric(0.5, &p).0 + 0.5).abs() < 1e-15);
            }
        }
    }
}

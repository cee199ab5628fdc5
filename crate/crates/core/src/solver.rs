//! Equilibrium computation.
//!
//! Symmetric equilibria (on the locus `mu_v = w(1 - 2 mu_i)`) are the unique
//! root of [`foc_symmetric`] on `[0, 1/2]`, found by bisection. General
//! parameters go through damped alternating best responses followed by a
//! Newton polish of the two first-order conditions. Every result carries its
//! residuals and second-order values so the caller can see why it was or was
//! not certified.

use serde::{Deserialize, Serialize};

use crate::calculus::{foc_symmetric, own_foc, own_soc};
use crate::error::{Error, Result};
use crate::model::{expected_utility, win_probability_l, ModelParams, Party, PlatformPair};

/// Best-response brackets never grow beyond this interval.
pub const BRACKET_LIMIT: (f64, f64) = (-8.0, 9.0);

/// How far `mu_v` may sit from `w(1 - 2 mu_i)` for the symmetric solver to accept it.
pub const LOCUS_TOLERANCE: f64 = 1e-12;

/// Grid step of the pre-scan used when single-peakedness is not guaranteed.
pub const FINE_SCAN_STEP: f64 = 1e-4;

const COARSE_SCAN_CELLS: usize = 400;

/// Starting profiles for [`solve_multistart`]: a 3x3 lattice.
pub const MULTISTART_LATTICE: [f64; 3] = [0.1, 0.25, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol_root: f64,
    pub tol_fp: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_root: 1e-12,
            tol_fp: 1e-10,
            max_iter: 500,
            damping: 0.5,
            bracket_lo: -0.5,
            bracket_hi: 1.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParams {
                name,
                value,
                reason,
            })
        };
        if !(self.tol_root > 0.0) {
            return bad("tol_root", self.tol_root, "must be > 0");
        }
        if !(self.tol_fp > 0.0) {
            return bad("tol_fp", self.tol_fp, "must be > 0");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping", self.damping, "must lie in (0, 1]");
        }
        if self.max_iter == 0 {
            return bad("max_iter", 0.0, "must be positive");
        }
        if !(self.bracket_lo < self.bracket_hi) {
            return bad("bracket_lo", self.bracket_lo, "must be below bracket_hi");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub platforms: PlatformPair,
    pub pr_l: f64,
    pub foc_residual_l: f64,
    pub foc_residual_r: f64,
    pub soc_l: f64,
    pub soc_r: f64,
    pub iterations: usize,
    pub certified: bool,
    pub kind: EquilibriumKind,
    /// Set when `sigma_v` is below the single-peakedness bound.
    pub single_peak_warning: bool,
    /// Profiles visited by the best-response iteration (empty for the symmetric solver).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<PlatformPair>,
}

impl EquilibriumResult {
    fn assess(
        platforms: PlatformPair,
        params: &ModelParams,
        cfg: &SolverConfig,
        kind: EquilibriumKind,
        iterations: usize,
        trace: Vec<PlatformPair>,
    ) -> Self {
        let foc_l = own_foc(Party::L, platforms, params).0;
        let foc_r = own_foc(Party::R, platforms, params).0;
        let soc_l = own_soc(Party::L, platforms, params).0;
        let soc_r = own_soc(Party::R, platforms, params).0;
        let certified = foc_l.abs().max(foc_r.abs()) < cfg.tol_fp && soc_l < 0.0 && soc_r < 0.0;
        EquilibriumResult {
            platforms,
            pr_l: win_probability_l(platforms, params),
            foc_residual_l: foc_l,
            foc_residual_r: foc_r,
            soc_l,
            soc_r,
            iterations,
            certified,
            kind,
            single_peak_warning: !params.single_peaked_guaranteed(),
            trace,
        }
    }

    pub fn delta(&self) -> f64 {
        self.platforms.polarization()
    }

    pub fn max_residual(&self) -> f64 {
        self.foc_residual_l.abs().max(self.foc_residual_r.abs())
    }

    /// Whether `|p_L + p_R - 1| < tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.platforms.asymmetry().abs() < tol
    }
}

/// Bisection for a sign change on `[lo, hi]`. Stops when the bracket is
/// narrower than `tol` or the midpoint is an exact root.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, usize)> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok((lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, 0));
    }
    if f_lo.signum() == f_hi.signum() || !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::Domain(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, iterations));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iterations))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if d <= c {
            break;
        }
    }
    0.5 * (a + b)
}

/// The unique symmetric equilibrium. Requires the symmetry locus.
pub fn solve_symmetric(params: &ModelParams, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    params.validate()?;
    cfg.validate()?;
    let required = params.w() * (1.0 - 2.0 * params.mu_i());
    if (params.mu_v() - required).abs() > LOCUS_TOLERANCE {
        return Err(Error::OffLocus {
            mu_v: params.mu_v(),
            required,
        });
    }
    let (p_l, iterations) = bisect(|x| foc_symmetric(x, params).0, 0.0, 0.5, cfg.tol_root)?;
    Ok(EquilibriumResult::assess(
        PlatformPair::symmetric(p_l),
        params,
        cfg,
        EquilibriumKind::Symmetric,
        iterations,
        Vec::new(),
    ))
}

/// Symmetric solver on the locus, best-response iteration elsewhere.
pub fn solve(params: &ModelParams, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    if params.locus_offset().abs() <= LOCUS_TOLERANCE {
        solve_symmetric(params, cfg)
    } else {
        solve_asymmetric(params, cfg)
    }
}

fn scan_argmax(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (usize, usize, f64) {
    let cells = ((hi - lo) / step).ceil().max(2.0) as usize;
    let h = (hi - lo) / cells as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..=cells {
        let v = f(lo + k as f64 * h);
        // Ties resolve toward the center of the policy space.
        let closer =
            |a: usize, b: usize| (lo + a as f64 * h - 0.5).abs() < (lo + b as f64 * h - 0.5).abs();
        if v > best.1 || (v == best.1 && closer(k, best.0)) {
            best = (k, v);
        }
    }
    (best.0, cells, h)
}

/// Maximizer of `party`'s expected utility given the opponent's platform.
pub fn best_response(
    opponent: f64,
    party: Party,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<f64> {
    let profile = |x: f64| match party {
        Party::L => PlatformPair::new(x, opponent),
        Party::R => PlatformPair::new(opponent, x),
    };
    let utility = |x: f64| expected_utility(party, profile(x), params);
    let foc = |x: f64| own_foc(party, profile(x), params).0;
    let soc = |x: f64| own_soc(party, profile(x), params).0;

    let (mut lo, mut hi) = (cfg.bracket_lo, cfg.bracket_hi);
    loop {
        let step = if params.single_peaked_guaranteed() {
            (hi - lo) / COARSE_SCAN_CELLS as f64
        } else {
            FINE_SCAN_STEP
        };
        let (k, cells, h) = scan_argmax(&utility, lo, hi, step);
        if k == 0 || k == cells {
            if lo <= BRACKET_LIMIT.0 && hi >= BRACKET_LIMIT.1 {
                return Err(Error::UnboundedResponse {
                    party,
                    opponent,
                    lo,
                    hi,
                });
            }
            let (mid, width) = (0.5 * (lo + hi), hi - lo);
            lo = (mid - width).max(BRACKET_LIMIT.0);
            hi = (mid + width).min(BRACKET_LIMIT.1);
            continue;
        }
        let a = lo + (k - 1) as f64 * h;
        let b = lo + (k + 1) as f64 * h;
        let mut x = golden_section_max(utility, a, b, 1e-9);
        for _ in 0..8 {
            let g = foc(x);
            if g.abs() < cfg.tol_root {
                break;
            }
            let curv = soc(x);
            if !(curv < 0.0) {
                break;
            }
            let next = x - g / curv;
            if !(a..=b).contains(&next) {
                break;
            }
            x = next;
        }
        return Ok(x);
    }
}

/// Damped alternating best responses from the default start `(0.25, 0.75)`.
pub fn solve_asymmetric(params: &ModelParams, cfg: &SolverConfig) -> Result<EquilibriumResult> {
    solve_asymmetric_from(PlatformPair::new(0.25, 0.75), params, cfg)
}

pub fn solve_asymmetric_from(
    start: PlatformPair,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult> {
    params.validate()?;
    cfg.validate()?;
    let lambda = cfg.damping;
    let mut current = start;
    let mut trace = vec![current];
    let mut last_change = f64::INFINITY;
    for iteration in 1..=cfg.max_iter {
        let reply_l = best_response(current.p_r, Party::L, params, cfg)?;
        let p_l = (1.0 - lambda) * current.p_l + lambda * reply_l;
        let reply_r = best_response(p_l, Party::R, params, cfg)?;
        let p_r = (1.0 - lambda) * current.p_r + lambda * reply_r;
        let next = PlatformPair::new(p_l, p_r);
        last_change = (next.p_l - current.p_l)
            .abs()
            .max((next.p_r - current.p_r).abs());
        trace.push(next);
        current = next;

        if last_change < cfg.tol_fp {
            let polished = newton_polish(current, params);
            return Ok(EquilibriumResult::assess(
                polished,
                params,
                cfg,
                EquilibriumKind::Asymmetric,
                iteration,
                trace,
            ));
        }
        if trace.len() >= 3 {
            let two_back = trace[trace.len() - 3];
            let back = (current.p_l - two_back.p_l)
                .abs()
                .max((current.p_r - two_back.p_r).abs());
            if back < cfg.tol_fp && last_change > 10.0 * cfg.tol_fp {
                return Err(Error::Oscillation {
                    iterations: iteration,
                    trace,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        last_change,
        trace,
    })
}

/// Newton steps on the pair of first-order conditions. Cross partials come
/// from central differences of the analytic conditions. A step is kept only
/// if it shrinks the residual.
fn newton_polish(start: PlatformPair, params: &ModelParams) -> PlatformPair {
    let residual = |pp: PlatformPair| {
        (
            own_foc(Party::L, pp, params).0,
            own_foc(Party::R, pp, params).0,
        )
    };
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let mut pp = start;
    let mut r = residual(pp);
    for _ in 0..6 {
        if norm(r) < 1e-15 {
            break;
        }
        let h = 1e-6;
        let cross_l = (own_foc(Party::L, PlatformPair::new(pp.p_l, pp.p_r + h), params).0
            - own_foc(Party::L, PlatformPair::new(pp.p_l, pp.p_r - h), params).0)
            / (2.0 * h);
        let cross_r = (own_foc(Party::R, PlatformPair::new(pp.p_l + h, pp.p_r), params).0
            - own_foc(Party::R, PlatformPair::new(pp.p_l - h, pp.p_r), params).0)
            / (2.0 * h);
        let a = own_soc(Party::L, pp, params).0;
        let d = own_soc(Party::R, pp, params).0;
        let det = a * d - cross_l * cross_r;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dl = (d * r.0 - cross_l * r.1) / det;
        let dr = (a * r.1 - cross_r * r.0) / det;
        let next = PlatformPair::new(pp.p_l - dl, pp.p_r - dr);
        let r_next = residual(next);
        if !(norm(r_next) < norm(r)) {
            break;
        }
        pp = next;
        r = r_next;
    }
    pp
}

/// Outcome of running the best-response iteration from every lattice start.
#[derive(Debug, Clone)]
pub struct MultiStartReport {
    /// Distinct equilibria (profiles more than `1e-7` apart).
    pub equilibria: Vec<EquilibriumResult>,
    pub failures: Vec<(PlatformPair, Error)>,
}

pub fn solve_multistart(params: &ModelParams, cfg: &SolverConfig) -> MultiStartReport {
    let mut report = MultiStartReport {
        equilibria: Vec::new(),
        failures: Vec::new(),
    };
    for &l in &MULTISTART_LATTICE {
        for &r in &MULTISTART_LATTICE {
            let start = PlatformPair::new(l, 1.0 - r);
            match solve_asymmetric_from(start, params, cfg) {
                Ok(res) => {
                    let seen = report.equilibria.iter().any(|e| {
                        (e.platforms.p_l - res.platforms.p_l).abs() < 1e-7
                            && (e.platforms.p_r - res.platforms.p_r).abs() < 1e-7
                    });
                    if !seen {
                        report.equilibria.push(res);
                    }
                }
                Err(e) => report.failures.push((start, e)),
            }
        }
    }
    report
}

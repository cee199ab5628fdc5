//! Comparative statics in the ideological weight `w`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{dpl_dw_symmetric, foc_symmetric, slope_sign_threshold};
use crate::error::{Error, Result};
use crate::gaussmath::PHI_0;
use crate::model::ModelParams;
use crate::solver::{bisect, solve_asymmetric, solve_symmetric, EquilibriumResult, SolverConfig};

/// Step of the finite-difference column in [`sweep_w`].
pub const FD_STEP: f64 = 1e-4;

/// Knife-edge tolerance for `w == w_hat` in [`classify_moderate`].
pub const W_HAT_TOLERANCE: f64 = 1e-10;

/// `|p_L + p_R - 1|` below this counts as symmetric in empirical verdicts.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

const W_TILDE_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Symmetric root on the locus; every row must satisfy `mu_v = w(1 - 2 mu_i)`.
    #[default]
    Symmetric,
    /// Best-response iteration with fixed `mu_v`.
    Asymmetric,
}

/// One row of a sweep. Field names are the CSV column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w: f64,
    #[serde(rename = "p_L")]
    pub p_l: f64,
    #[serde(rename = "p_R")]
    pub p_r: f64,
    pub delta: f64,
    #[serde(rename = "pr_L")]
    pub pr_l: f64,
    /// Implicit-function slope; NaN in asymmetric mode.
    #[serde(rename = "dpL_dw_analytic")]
    pub dpl_dw_analytic: f64,
    #[serde(rename = "dpL_dw_fd")]
    pub dpl_dw_fd: f64,
    #[serde(rename = "soc_L")]
    pub soc_l: f64,
    #[serde(rename = "soc_R")]
    pub soc_r: f64,
    pub certified: bool,
    /// Solver failure for this row. Not serialized.
    #[serde(skip)]
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(w: f64, err: &Error) -> Self {
        SweepRow {
            w,
            p_l: f64::NAN,
            p_r: f64::NAN,
            delta: f64::NAN,
            pr_l: f64::NAN,
            dpl_dw_analytic: f64::NAN,
            dpl_dw_fd: f64::NAN,
            soc_l: f64::NAN,
            soc_r: f64::NAN,
            certified: false,
            error: Some(format!("error[{}]: {err}", err.code())),
        }
    }
}

/// Root of [`foc_symmetric`] on `[0, 1/2]`. Unlike [`solve_symmetric`] this
/// does not check the locus; the condition itself does not involve the means.
pub fn symmetric_platform(params: &ModelParams, tol: f64) -> Result<f64> {
    bisect(|x| foc_symmetric(x, params).0, 0.0, 0.5, tol).map(|(x, _)| x)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn derivative(f: impl Fn(f64) -> Result<f64>, w: f64) -> Result<f64> {
    let h = FD_STEP;
    if w >= h {
        Ok((f(w + h)? - f(w - h)?) / (2.0 * h))
    } else {
        Ok((-3.0 * f(w)? + 4.0 * f(w + h)? - f(w + 2.0 * h)?) / (2.0 * h))
    }
}

fn sweep_row(w: f64, base: &ModelParams, mode: SweepMode, cfg: &SolverConfig) -> Result<SweepRow> {
    let params = base.with_w(w)?;
    let (eq, analytic, fd) = match mode {
        SweepMode::Symmetric => {
            let eq = solve_symmetric(&params, cfg)?;
            let analytic = dpl_dw_symmetric(eq.platforms.p_l, &params)?;
            // Along the locus the symmetric condition is independent of the means.
            let fd = derivative(|x| symmetric_platform(&params.with_w(x)?, cfg.tol_root), w)?;
            (eq, analytic, fd)
        }
        SweepMode::Asymmetric => {
            let eq = solve_asymmetric(&params, cfg)?;
            let fd = derivative(
                |x| Ok(solve_asymmetric(&params.with_w(x)?, cfg)?.platforms.p_l),
                w,
            )?;
            (eq, f64::NAN, fd)
        }
    };
    Ok(row_from(w, &eq, analytic, fd))
}

fn row_from(w: f64, eq: &EquilibriumResult, analytic: f64, fd: f64) -> SweepRow {
    SweepRow {
        w,
        p_l: eq.platforms.p_l,
        p_r: eq.platforms.p_r,
        delta: eq.delta(),
        pr_l: eq.pr_l,
        dpl_dw_analytic: analytic,
        dpl_dw_fd: fd,
        soc_l: eq.soc_l,
        soc_r: eq.soc_r,
        certified: eq.certified,
        error: None,
    }
}

/// Equilibrium rows along `w_grid`. Rows are computed in parallel on the
/// current rayon pool and returned in grid order. A failing row is kept with
/// NaN values and its error message.
pub fn sweep_w(
    w_grid: &[f64],
    base: &ModelParams,
    mode: SweepMode,
    cfg: &SolverConfig,
) -> Result<Vec<SweepRow>> {
    base.validate()?;
    cfg.validate()?;
    if let Some(pair) = w_grid.windows(2).find(|p| !(p[0] < p[1])) {
        return Err(Error::Domain(format!(
            "w grid must be strictly increasing ({} then {})",
            pair[0], pair[1]
        )));
    }
    Ok(w_grid
        .par_iter()
        .map(|&w| sweep_row(w, base, mode, cfg).unwrap_or_else(|e| SweepRow::failed(w, &e)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// Grid point at which `p_L` is largest.
    pub w_tilde: f64,
    /// `p_L` slope changes sign exactly once, from positive to negative.
    pub is_single_peaked: bool,
    /// `delta` slope changes sign exactly once, from negative to positive.
    pub is_u_shaped: bool,
    /// Sign changes of the forward-difference slope of `delta`.
    pub sign_changes: usize,
}

/// Signs of consecutive forward differences, with exact zeros dropped, and
/// the number of sign changes between them.
fn slope_signs(values: &[f64]) -> (Vec<f64>, usize) {
    let signs: Vec<f64> = values
        .windows(2)
        .map(|v| v[1] - v[0])
        .filter(|d| *d != 0.0)
        .map(f64::signum)
        .collect();
    let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
    (signs, changes)
}

pub fn shape_report(rows: &[SweepRow]) -> Result<ShapeReport> {
    if rows.len() < 3 {
        return Err(Error::Domain(
            "shape detection needs at least 3 rows".into(),
        ));
    }
    if let Some(bad) = rows
        .iter()
        .find(|r| !(r.p_l.is_finite() && r.delta.is_finite()))
    {
        return Err(Error::Domain(format!(
            "row at w = {} has no solution",
            bad.w
        )));
    }
    let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let lefts: Vec<f64> = rows.iter().map(|r| r.p_l).collect();
    let (d_signs, d_changes) = slope_signs(&deltas);
    let (p_signs, p_changes) = slope_signs(&lefts);
    let peak = rows
        .iter()
        .max_by(|a, b| a.p_l.total_cmp(&b.p_l))
        .map(|r| r.w)
        .unwrap_or(f64::NAN);
    Ok(ShapeReport {
        w_tilde: peak,
        is_single_peaked: p_changes == 1 && p_signs.first() == Some(&1.0),
        is_u_shaped: d_changes == 1 && d_signs.first() == Some(&-1.0),
        sign_changes: d_changes,
    })
}

/// Closed-form polarization at `w = 0`:
/// `(sqrt(s^2 + 4 V^2 phi0^2 + 4 s (V + 2) phi0) - 2 V phi0 - s) / (4 phi0)` with `s = sigma_v`.
pub fn delta_at_zero(params: &ModelParams) -> f64 {
    let (v, s) = (params.office_rent(), params.sigma_v());
    let root = (s * s + 4.0 * v * v * PHI_0 * PHI_0 + 4.0 * s * (v + 2.0) * PHI_0).sqrt();
    (root - 2.0 * v * PHI_0 - s) / (4.0 * PHI_0)
}

/// `sigma_i / (sigma_i + phi0)`, the polarization as `w -> infinity`.
pub fn delta_limit_infinity(params: &ModelParams) -> f64 {
    params.sigma_i() / (params.sigma_i() + PHI_0)
}

/// Ideological weight at which the symmetric platform `p_L(w)` peaks.
///
/// The upper end of the search grows by doubling until the slope turns
/// negative. A golden-section pass locates the peak, and bisection on the
/// sign of the implicit-function slope then pins it down.
pub fn w_tilde(params: &ModelParams, cfg: &SolverConfig) -> Result<f64> {
    params.validate()?;
    let tol = cfg.tol_root;
    let p_at = |w: f64| -> Result<f64> { symmetric_platform(&params.with_w(w)?, tol) };
    let slope_at = |w: f64| -> Result<f64> {
        let p = params.with_w(w)?;
        dpl_dw_symmetric(symmetric_platform(&p, tol)?, &p)
    };

    let mut w_max = 1.0;
    while slope_at(w_max)? >= 0.0 {
        w_max *= 2.0;
        if w_max > W_TILDE_CAP {
            return Err(Error::NoPeak { cap: W_TILDE_CAP });
        }
    }
    let coarse = crate::solver::golden_section_max(
        |w| p_at(w).unwrap_or(f64::NEG_INFINITY),
        0.0,
        w_max,
        1e-4 * w_max,
    );
    let (mut lo, mut hi) = (
        (coarse - 1e-2 * w_max).max(0.0),
        (coarse + 1e-2 * w_max).min(w_max),
    );
    if !(slope_at(lo)? > 0.0 && slope_at(hi)? < 0.0) {
        lo = 0.0;
        hi = w_max;
    }
    let sign = |w: f64| slope_at(w).map(f64::signum).unwrap_or(f64::NAN);
    bisect(sign, lo, hi, 1e-13 * w_max.max(1.0)).map(|(w, _)| w)
}

/// `w - sigma_v^2 / (4 sigma_i^2 (1 + V - 2 p_L(w)))`, zero at the peak.
pub fn w_tilde_residual(w: f64, params: &ModelParams, cfg: &SolverConfig) -> Result<f64> {
    let p = params.with_w(w)?;
    let p_l = symmetric_platform(&p, cfg.tol_root)?;
    Ok(w - slope_sign_threshold(p_l, &p))
}

/// `mu_v` on the symmetry locus: `w (1 - 2 mu_i)`.
pub fn symmetry_locus_mu_v(w: f64, mu_i: f64) -> f64 {
    w * (1.0 - 2.0 * mu_i)
}

/// The weight `mu_v / (1 - 2 mu_i)` at which the parameters sit on the locus.
pub fn w_hat(mu_v: f64, mu_i: f64) -> Result<f64> {
    if mu_i == 0.5 {
        return Err(Error::DegenerateLocus);
    }
    Ok(mu_v / (1.0 - 2.0 * mu_i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moderation {
    LModerate,
    RModerate,
    Symmetric,
}

impl Moderation {
    /// Verdict from the sign of `p_L + p_R - 1`.
    pub fn from_asymmetry(asymmetry: f64, tol: f64) -> Self {
        if asymmetry.abs() < tol {
            Moderation::Symmetric
        } else if asymmetry > 0.0 {
            Moderation::LModerate
        } else {
            Moderation::RModerate
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerationReport {
    /// Theorem verdict when available, otherwise the empirical one.
    pub verdict: Moderation,
    /// Set only when `mu_v < 0` and `mu_i > 1/2`.
    pub theorem: Option<Moderation>,
    pub empirical: Moderation,
    pub equilibrium: EquilibriumResult,
}

impl ModerationReport {
    pub fn agrees(&self) -> bool {
        self.theorem.is_none_or(|t| t == self.empirical)
    }
}

/// Which party sits closer to the center.
pub fn classify_moderate(params: &ModelParams, cfg: &SolverConfig) -> Result<ModerationReport> {
    let equilibrium = solve_asymmetric(params, cfg)?;
    let empirical =
        Moderation::from_asymmetry(equilibrium.platforms.asymmetry(), SYMMETRY_TOLERANCE);
    let theorem = if params.mu_v() < 0.0 && params.mu_i() > 0.5 {
        let gap = params.w() - w_hat(params.mu_v(), params.mu_i())?;
        Some(if gap.abs() <= W_HAT_TOLERANCE {
            Moderation::Symmetric
        } else if gap > 0.0 {
            Moderation::LModerate
        } else {
            Moderation::RModerate
        })
    } else {
        None
    };
    Ok(ModerationReport {
        verdict: theorem.unwrap_or(empirical),
        theorem,
        empirical,
        equilibrium,
    })
}

/// `d(p_L + p_R)/dw` at a symmetric equilibrium on the locus, holding the means fixed:
/// `4 (2 mu_i - 1) p^2 / (1 - 16 p^3 + 12 p^2 - 4 p + V + w)`.
pub fn prop5_slope_identity(p_l: f64, params: &ModelParams) -> Result<f64> {
    let p = p_l;
    let den = 1.0 - 16.0 * p.powi(3) + 12.0 * p * p - 4.0 * p + params.office_rent() + params.w();
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(4.0 * (2.0 * params.mu_i() - 1.0) * p * p / den)
}

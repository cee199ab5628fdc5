//! Brute-force ground truth for the analytic machinery: exhaustive grid
//! argmaxes, Monte Carlo simulation of the electorate, and scans for extra
//! local maxima. Nothing here calls the derivative code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    expected_utility, voter_utility, win_probability_l, Anchors, ModelParams, Party, PlatformPair,
};
use crate::solver::{best_response, EquilibriumResult, SolverConfig};

/// Span every grid oracle must cover.
pub const MIN_SPAN: (f64, f64) = (-0.5, 1.5);

/// Minimum Monte Carlo sample size.
pub const MIN_SAMPLES: u64 = 10_000;

/// Draws per Monte Carlo batch. Each batch owns one ChaCha stream.
pub const MC_BATCH: u64 = 1 << 16;

/// Monte Carlo agreement bound, in binomial standard errors.
pub const MC_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    GridBr,
    McWinprob,
    PeakScan,
    Deviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kind: OracleKind,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    /// `max_discrepancy <= tolerance`.
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl OracleReport {
    fn new(kind: OracleKind, max_discrepancy: f64, tolerance: f64) -> Self {
        OracleReport {
            kind,
            max_discrepancy,
            tolerance,
            passed: max_discrepancy <= tolerance,
            sample_size: None,
            grid_step: None,
            seed: None,
        }
    }
}

fn check_grid(grid_step: f64, span: (f64, f64)) -> Result<()> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidParams {
            name: "grid_step",
            value: grid_step,
            reason: "must be positive and finite",
        });
    }
    if !(span.0 <= MIN_SPAN.0 && span.1 >= MIN_SPAN.1) {
        return Err(Error::Domain(format!(
            "span [{}, {}] must cover [{}, {}]",
            span.0, span.1, MIN_SPAN.0, MIN_SPAN.1
        )));
    }
    Ok(())
}

fn utility_on_grid(
    opponent: f64,
    party: Party,
    params: &ModelParams,
    grid_step: f64,
    span: (f64, f64),
) -> Vec<(f64, f64)> {
    let n = ((span.1 - span.0) / grid_step).round() as usize;
    (0..=n)
        .map(|k| {
            let x = span.0 + k as f64 * grid_step;
            let pp = PlatformPair::new(opponent, opponent).with(party, x);
            (x, expected_utility(party, pp, params))
        })
        .collect()
}

/// Argmax of `party`'s expected utility over the grid `span.0 + k * grid_step`.
/// Ties go to the point nearest 1/2.
pub fn grid_best_response(
    opponent: f64,
    party: Party,
    params: &ModelParams,
    grid_step: f64,
    span: (f64, f64),
) -> Result<f64> {
    check_grid(grid_step, span)?;
    let values = utility_on_grid(opponent, party, params, grid_step, span);
    let mut best = 0;
    for (k, &(x, u)) in values.iter().enumerate() {
        let (bx, bu) = values[best];
        if u > bu || (u == bu && (x - 0.5).abs() < (bx - 0.5).abs()) {
            best = k;
        }
    }
    if best == 0 || best == values.len() - 1 {
        return Err(Error::SpanTooSmall {
            argmax: values[best].0,
            lo: span.0,
            hi: span.1,
        });
    }
    Ok(values[best].0)
}

/// Compares [`best_response`] with [`grid_best_response`]; passes when they
/// are within one grid step.
pub fn grid_br_check(
    opponent: f64,
    party: Party,
    params: &ModelParams,
    cfg: &SolverConfig,
    grid_step: f64,
) -> Result<OracleReport> {
    let grid = grid_best_response(opponent, party, params, grid_step, MIN_SPAN)?;
    let analytic = best_response(opponent, party, params, cfg)?;
    let mut report = OracleReport::new(OracleKind::GridBr, (grid - analytic).abs(), grid_step);
    report.grid_step = Some(grid_step);
    Ok(report)
}

/// Share of simulated voters who vote `L`. Each voter draws an ideology from
/// `N(mu_i, sigma_i^2)` and a valence shock from `N(mu_v, sigma_v^2)` and
/// votes `L` iff `u_L >= u_R + v`.
///
/// Batch `b` of [`MC_BATCH`] draws uses ChaCha stream `b` under `seed`, so the
/// result does not depend on the thread count.
pub fn mc_win_probability(
    pp: PlatformPair,
    params: &ModelParams,
    n_samples: u64,
    seed: u64,
) -> Result<f64> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParams {
            name: "n_samples",
            value: n_samples as f64,
            reason: "must be at least 10^4",
        });
    }
    let ideology =
        Normal::new(params.mu_i(), params.sigma_i()).map_err(|e| Error::Domain(e.to_string()))?;
    let valence =
        Normal::new(params.mu_v(), params.sigma_v()).map_err(|e| Error::Domain(e.to_string()))?;
    let anchors = Anchors::STANDARD;
    let batches = n_samples.div_ceil(MC_BATCH);
    let votes: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let draws = MC_BATCH.min(n_samples - b * MC_BATCH);
            let mut count = 0u64;
            for _ in 0..draws {
                let i_v = ideology.sample(&mut rng);
                let v = valence.sample(&mut rng);
                let u_l = voter_utility(anchors.i_l, pp.p_l, i_v, params);
                let u_r = voter_utility(anchors.i_r, pp.p_r, i_v, params);
                if u_l >= u_r + v {
                    count += 1;
                }
            }
            count
        })
        .sum();
    Ok(votes as f64 / n_samples as f64)
}

/// Monte Carlo against the closed-form win probability. The discrepancy is
/// measured in binomial standard errors at the closed-form probability.
pub fn mc_check(
    pp: PlatformPair,
    params: &ModelParams,
    n_samples: u64,
    seed: u64,
) -> Result<OracleReport> {
    let mc = mc_win_probability(pp, params, n_samples, seed)?;
    let exact = win_probability_l(pp, params);
    let se = (exact * (1.0 - exact) / n_samples as f64).sqrt();
    let z = if se > 0.0 {
        (mc - exact).abs() / se
    } else if mc == exact {
        0.0
    } else {
        f64::INFINITY
    };
    let mut report = OracleReport::new(OracleKind::McWinprob, z, MC_SIGMAS);
    report.sample_size = Some(n_samples);
    report.seed = Some(seed);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeVerdict {
    /// Exactly one interior strict local maximum.
    pub unimodal: bool,
    pub n_local_maxima: usize,
    /// Utility still rising at either end of the span. Far from the center
    /// utility tends to a constant that can be approached from below.
    pub edge_ascent: bool,
}

/// Counts strict local maxima of `party`'s expected utility on a grid over [`MIN_SPAN`].
pub fn peak_scan(
    opponent: f64,
    party: Party,
    params: &ModelParams,
    grid_step: f64,
) -> Result<ShapeVerdict> {
    if !(grid_step <= 1e-3) {
        return Err(Error::InvalidParams {
            name: "grid_step",
            value: grid_step,
            reason: "must be at most 1e-3",
        });
    }
    check_grid(grid_step, MIN_SPAN)?;
    let u: Vec<f64> = utility_on_grid(opponent, party, params, grid_step, MIN_SPAN)
        .into_iter()
        .map(|(_, u)| u)
        .collect();
    let n_local_maxima = u.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
    let last = u.len() - 1;
    Ok(ShapeVerdict {
        unimodal: n_local_maxima == 1,
        n_local_maxima,
        edge_ascent: u[0] > u[1] || u[last] > u[last - 1],
    })
}

/// Random unilateral deviations from `result`. The discrepancy is the largest
/// utility gain found by either party.
pub fn deviation_check(
    result: &EquilibriumResult,
    params: &ModelParams,
    cfg: &SolverConfig,
    deviations_per_party: usize,
    seed: u64,
) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for party in [Party::L, Party::R] {
        let base = expected_utility(party, result.platforms, params);
        for _ in 0..deviations_per_party {
            let x = rng.random_range(cfg.bracket_lo..cfg.bracket_hi);
            let gain = expected_utility(party, result.platforms.with(party, x), params) - base;
            worst = worst.max(gain);
        }
    }
    let mut report = OracleReport::new(OracleKind::Deviation, worst.max(0.0), 1e-9);
    report.sample_size = Some(2 * deviations_per_party as u64);
    report.seed = Some(seed);
    report
}

/// Runs [`deviation_check`] and withdraws certification if it fails.
pub fn certify(
    result: &mut EquilibriumResult,
    params: &ModelParams,
    cfg: &SolverConfig,
    seed: u64,
) -> OracleReport {
    let report = deviation_check(result, params, cfg, 20, seed);
    result.certified &= report.passed;
    report
}

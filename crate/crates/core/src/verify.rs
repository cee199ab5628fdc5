//! Named end-to-end checks. Each one draws its random configurations from a
//! ChaCha stream keyed by the suite seed and the check's position, so a given
//! seed always reproduces the same verdicts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    delta_at_zero, delta_limit_infinity, linear_grid, prop5_slope_identity, shape_report, sweep_w,
    symmetric_platform, symmetry_locus_mu_v, w_tilde, Moderation, SweepMode,
};
use crate::calculus::{
    d2_eu_l_d_pl2, d2_eu_r_d_pr2, d_eu_l_d_pl, d_eu_r_d_pr, dpl_dw_polar, dpl_dw_symmetric,
    foc_symmetric_polar, slope_sign_threshold, Polar,
};
use crate::cli::{polarization_series, read_sweep_csv, write_sweep_csv, PolarizationRecord};
use crate::error::{Error, Result};
use crate::model::{expected_utility_l, expected_utility_r, ModelParams, Party, PlatformPair};
use crate::oracle::{grid_br_check, mc_check, peak_scan, MC_SIGMAS};
use crate::solver::{bisect, solve_asymmetric, solve_symmetric, SolverConfig};

pub const CHECK_IDS: [&str; 13] = [
    "prop3-delta0",
    "prop3-limit",
    "prop2-ushape",
    "prop1-polar",
    "prop4-locus",
    "prop5-threshold",
    "prop5-slope",
    "eq3-ift",
    "oracle-br",
    "oracle-mc",
    "singlepeak-bound",
    "deriv-fd",
    "cli-roundtrip",
];

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    /// One line: `PASS|FAIL <id> max_discrepancy=<e> tolerance=<e> <detail>`.
    pub fn line(&self) -> String {
        format!(
            "{} {} max_discrepancy={:e} tolerance={:e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.max_discrepancy,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            solver: SolverConfig::default(),
        }
    }
}

/// Running maximum of a discrepancy together with where it occurred.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            at: String::new(),
        }
    }

    fn update(&mut self, value: f64, at: impl FnOnce() -> String) {
        // NaN registers as an infinite discrepancy.
        if value.is_nan() || value > self.value {
            self.value = if value.is_nan() { f64::INFINITY } else { value };
            self.at = at();
        }
    }

    fn finish(self, id: &'static str, tolerance: f64, strict: bool, extra: &str) -> CheckOutcome {
        let passed = if strict {
            self.value < tolerance
        } else {
            self.value <= tolerance
        };
        let mut detail = extra.to_string();
        if !self.at.is_empty() {
            if !detail.is_empty() {
                detail.push_str("; ");
            }
            detail.push_str("worst at ");
            detail.push_str(&self.at);
        }
        CheckOutcome {
            id,
            passed,
            max_discrepancy: self.value,
            tolerance,
            detail,
        }
    }
}

fn rng_for(id: &str, seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = CHECK_IDS
        .iter()
        .position(|c| *c == id)
        .unwrap_or(CHECK_IDS.len());
    rng.set_stream(index as u64);
    rng
}

/// Parameters drawn from the ranges used throughout the suite.
fn random_params(rng: &mut ChaCha8Rng, sigma_v_min: f64) -> Result<ModelParams> {
    ModelParams::new(
        rng.random_range(0.0..3.0),
        rng.random_range(0.1..5.0),
        rng.random_range(0.2..3.0),
        rng.random_range(sigma_v_min..3.0),
        rng.random_range(0.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

fn fail(id: &'static str, err: &Error) -> CheckOutcome {
    CheckOutcome {
        id,
        passed: false,
        max_discrepancy: f64::INFINITY,
        tolerance: f64::NAN,
        detail: format!("error[{}]: {err}", err.code()),
    }
}

pub fn run_check(id: &str, cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let (canonical, check): (&'static str, fn(&VerifyConfig) -> Result<CheckOutcome>) = match id {
        "prop3-delta0" => ("prop3-delta0", zero_weight_closed_form),
        "prop3-limit" => ("prop3-limit", large_weight_limit),
        "prop2-ushape" => ("prop2-ushape", u_shape),
        "prop1-polar" => ("prop1-polar", polar_limits),
        "prop4-locus" => ("prop4-locus", locus_symmetry),
        "prop5-threshold" => ("prop5-threshold", moderation_threshold),
        "prop5-slope" => ("prop5-slope", sum_slope),
        "eq3-ift" => ("eq3-ift", implicit_slope),
        "oracle-br" => ("oracle-br", oracle_br),
        "oracle-mc" => ("oracle-mc", oracle_mc),
        "singlepeak-bound" => ("singlepeak-bound", singlepeak_bound),
        "deriv-fd" => ("deriv-fd", deriv_fd),
        "cli-roundtrip" => ("cli-roundtrip", cli_roundtrip),
        other => {
            return Err(Error::Domain(format!(
                "unknown check `{other}`; known: {}",
                CHECK_IDS.join(", ")
            )))
        }
    };
    Ok(check(cfg).unwrap_or_else(|e| fail(canonical, &e)))
}

/// Runs the named checks, or all of them when `only` is empty.
pub fn run_suite(only: &[String], cfg: &VerifyConfig) -> Result<Vec<CheckOutcome>> {
    let ids: Vec<&str> = if only.is_empty() {
        CHECK_IDS.to_vec()
    } else {
        only.iter().map(String::as_str).collect()
    };
    ids.into_iter().map(|id| run_check(id, cfg)).collect()
}

fn zero_weight_closed_form(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("prop3-delta0", cfg.seed);
    let mut worst = Worst::new();
    for _ in 0..20 {
        let p = ModelParams::default()
            .with_office_rent(rng.random_range(0.1..5.0))?
            .with_sigma_v(rng.random_range(0.2..5.0))?;
        let eq = solve_symmetric(&p, &cfg.solver)?;
        worst.update((eq.delta() - delta_at_zero(&p)).abs(), || {
            format!("V={} sigma_v={}", p.office_rent(), p.sigma_v())
        });
    }
    Ok(worst.finish("prop3-delta0", 1e-10, false, "20 configurations"))
}

fn large_weight_limit(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut worst = Worst::new();
    for sigma_i in [0.5, 1.0, 2.0] {
        let p = ModelParams::default().with_sigma_i(sigma_i)?.with_w(1e6)?;
        let eq = solve_symmetric(&p, &cfg.solver)?;
        worst.update((eq.delta() - delta_limit_infinity(&p)).abs(), || {
            format!("sigma_i={sigma_i}")
        });
    }
    Ok(worst.finish("prop3-limit", 1e-3, true, "w = 1e6"))
}

fn u_shape(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let step = 0.005;
    let grid = linear_grid(0.0, 3.0, 601);
    let base = ModelParams::default();
    let rows = sweep_w(&grid, &base, SweepMode::Symmetric, &cfg.solver)?;
    let shape = shape_report(&rows)?;
    let exact = w_tilde(&base, &cfg.solver)?;
    let gap = (shape.w_tilde - exact).abs();
    let mut outcome = Worst {
        value: gap,
        at: String::new(),
    }
    .finish(
        "prop2-ushape",
        step,
        false,
        &format!(
            "u_shaped={} single_peaked={} delta_sign_changes={} grid_peak={} w_tilde={exact}",
            shape.is_u_shaped, shape.is_single_peaked, shape.sign_changes, shape.w_tilde
        ),
    );
    outcome.passed &= shape.is_u_shaped && shape.is_single_peaked;
    Ok(outcome)
}

fn polar_limits(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let tol = cfg.solver.tol_root;
    let mut violations = Vec::new();

    let valence = ModelParams::default().with_sigma_i(1e-8)?;
    let deltas = linear_grid(0.0, 2.0, 101)
        .into_iter()
        .map(|w| Ok(solve_symmetric(&valence.with_w(w)?, &cfg.solver)?.delta()))
        .collect::<Result<Vec<f64>>>()?;
    if !deltas.windows(2).all(|d| d[1] < d[0]) {
        violations.push("delta not strictly decreasing with sigma_i = 1e-8".to_string());
    }

    let polar_root = |p: &ModelParams, which| {
        bisect(
            |x| {
                foc_symmetric_polar(x, p, which)
                    .map(|f| f.0)
                    .unwrap_or(f64::NAN)
            },
            0.0,
            0.5,
            tol,
        )
        .map(|(x, _)| x)
    };
    let ideology = ModelParams::default();
    let roots = linear_grid(0.1, 2.0, 96)
        .into_iter()
        .map(|w| {
            let p = ideology.with_w(w)?;
            let root = polar_root(&p, Polar::IdeologyOnly)?;
            if !(dpl_dw_polar(root, &p, Polar::IdeologyOnly)? < 0.0) {
                violations.push(format!("ideology-only slope not negative at w={w}"));
            }
            Ok(root)
        })
        .collect::<Result<Vec<f64>>>()?;
    if !roots.windows(2).all(|r| r[1] < r[0]) {
        violations.push("ideology-only roots not strictly decreasing".to_string());
    }

    for w in linear_grid(0.0, 2.0, 101) {
        let p = valence.with_w(w)?;
        let root = polar_root(&p, Polar::ValenceOnly)?;
        if !(dpl_dw_polar(root, &p, Polar::ValenceOnly)? > 0.0) {
            violations.push(format!("valence-only slope not positive at w={w}"));
        }
    }

    let count = violations.len() as f64;
    Ok(CheckOutcome {
        id: "prop1-polar",
        passed: violations.is_empty(),
        max_discrepancy: count,
        tolerance: 0.0,
        detail: if violations.is_empty() {
            "monotone on both polar grids".into()
        } else {
            violations.join("; ")
        },
    })
}

fn locus_symmetry(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("prop4-locus", cfg.seed);
    let mut worst = Worst::new();
    for _ in 0..50 {
        let w = rng.random_range(0.0..3.0);
        let mu_i = rng.random_range(0.0..1.0);
        let p = ModelParams::default()
            .with_w(w)?
            .with_mu_i(mu_i)?
            .with_mu_v(symmetry_locus_mu_v(w, mu_i))?;
        let eq = solve_asymmetric(&p, &cfg.solver)?;
        worst.update(eq.platforms.asymmetry().abs(), || {
            format!("w={w} mu_i={mu_i}")
        });
    }
    Ok(worst.finish("prop4-locus", 1e-6, true, "50 configurations"))
}

fn moderation_threshold(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let base = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, -1.0)?;
    let mut wrong = Vec::new();
    let mut sym_gap = 0.0;
    let cases = [
        (0.25, Moderation::RModerate),
        (0.5, Moderation::RModerate),
        (0.75, Moderation::RModerate),
        (1.0, Moderation::Symmetric),
        (1.5, Moderation::LModerate),
        (2.0, Moderation::LModerate),
        (3.0, Moderation::LModerate),
    ];
    let mut sums = Vec::new();
    for (w, expected) in cases {
        let eq = solve_asymmetric(&base.with_w(w)?, &cfg.solver)?;
        let a = eq.platforms.asymmetry();
        sums.push(format!("{w}:{a:+.3e}"));
        if w == 1.0 {
            sym_gap = a.abs();
        }
        let got = Moderation::from_asymmetry(a, 1e-6);
        if got != expected {
            wrong.push(format!("w={w} expected {expected:?} got {got:?}"));
        }
    }
    let mut outcome = Worst {
        value: sym_gap,
        at: String::new(),
    }
    .finish(
        "prop5-threshold",
        1e-6,
        true,
        &format!("p_L+p_R-1 by w: {}", sums.join(" ")),
    );
    if !wrong.is_empty() {
        outcome.passed = false;
        outcome.detail = format!("{}; {}", wrong.join("; "), outcome.detail);
    }
    Ok(outcome)
}

fn sum_slope(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("prop5-slope", cfg.seed);
    let mut worst = Worst::new();
    let h = 1e-4;
    for _ in 0..10 {
        let w = rng.random_range(0.2..3.0);
        let mu_i = rng.random_range(0.0..1.0);
        let p = ModelParams::new(
            w,
            rng.random_range(0.1..5.0),
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
            mu_i,
            symmetry_locus_mu_v(w, mu_i),
        )?;
        let eq = solve_symmetric(&p, &cfg.solver)?;
        let identity = prop5_slope_identity(eq.platforms.p_l, &p)?;
        let sum = |x: f64| -> Result<f64> {
            let r = solve_asymmetric(&p.with_w(x)?, &cfg.solver)?;
            Ok(r.platforms.p_l + r.platforms.p_r)
        };
        let fd = (sum(w + h)? - sum(w - h)?) / (2.0 * h);
        worst.update((identity - fd).abs(), || format!("{p:?}"));
    }
    Ok(worst.finish(
        "prop5-slope",
        1e-4,
        false,
        "10 configurations, central h = 1e-4",
    ))
}

fn implicit_slope(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let base = ModelParams::default();
    let h = 1e-4;
    let tol = cfg.solver.tol_root;
    let mut worst = Worst::new();
    let mut sign_errors = Vec::new();
    let platform = |w: f64| -> Result<f64> { symmetric_platform(&base.with_w(w)?, tol) };
    for k in 0..20 {
        let w = 0.15 * k as f64;
        let p = base.with_w(w)?;
        let p_l = solve_symmetric(&p, &cfg.solver)?.platforms.p_l;
        let analytic = dpl_dw_symmetric(p_l, &p)?;
        let fd = if w >= h {
            (platform(w + h)? - platform(w - h)?) / (2.0 * h)
        } else {
            (-3.0 * platform(w)? + 4.0 * platform(w + h)? - platform(w + 2.0 * h)?) / (2.0 * h)
        };
        worst.update((analytic - fd).abs(), || format!("w={w}"));
        let predicted = slope_sign_threshold(p_l, &p) > w;
        if predicted != (analytic > 0.0) {
            sign_errors.push(format!("w={w}"));
        }
    }
    let mut outcome = worst.finish("eq3-ift", 1e-5, false, "20 points of w in [0, 2.85]");
    if !sign_errors.is_empty() {
        outcome.passed = false;
        outcome.detail = format!(
            "sign disagrees with threshold at {}",
            sign_errors.join(", ")
        );
    }
    Ok(outcome)
}

fn oracle_br(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("oracle-br", cfg.seed);
    let mut worst = Worst::new();
    for _ in 0..50 {
        let p = random_params(&mut rng, 0.15)?;
        let party = if rng.random_bool(0.5) {
            Party::L
        } else {
            Party::R
        };
        let opponent = rng.random_range(0.0..1.0);
        let report = grid_br_check(opponent, party, &p, &cfg.solver, 1e-4)?;
        worst.update(report.max_discrepancy, || {
            format!("{party:?} vs {opponent} at {p:?}")
        });
    }
    Ok(worst.finish(
        "oracle-br",
        1e-4,
        false,
        "50 configurations, grid step 1e-4",
    ))
}

fn oracle_mc(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("oracle-mc", cfg.seed);
    let mut worst = Worst::new();
    for k in 0..20u64 {
        let p = random_params(&mut rng, 0.15)?;
        let pp = PlatformPair::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let seed = cfg.seed.wrapping_add(k);
        let report = mc_check(pp, &p, 1_000_000, seed)?;
        worst.update(report.max_discrepancy, || format!("seed {seed}"));
    }
    Ok(worst.finish(
        "oracle-mc",
        MC_SIGMAS,
        false,
        "20 configurations, N = 1e6, discrepancy in standard errors",
    ))
}

fn singlepeak_bound(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("singlepeak-bound", cfg.seed);
    let mut extra_peaks = 0usize;
    let mut edge = 0usize;
    let mut first_bad = String::new();
    for _ in 0..100 {
        let p = random_params(&mut rng, 0.102)?;
        let party = if rng.random_bool(0.5) {
            Party::L
        } else {
            Party::R
        };
        let opponent = rng.random_range(0.0..1.0);
        let verdict = peak_scan(opponent, party, &p, 1e-3)?;
        if !verdict.unimodal {
            extra_peaks += 1;
            if first_bad.is_empty() {
                first_bad = format!(
                    "; first failure: {} maxima for {party:?} vs {opponent} at {p:?}",
                    verdict.n_local_maxima
                );
            }
        }
        edge += verdict.edge_ascent as usize;
    }
    Ok(CheckOutcome {
        id: "singlepeak-bound",
        passed: extra_peaks == 0,
        max_discrepancy: extra_peaks as f64,
        tolerance: 0.0,
        detail: format!(
            "100 configurations, {extra_peaks} not unimodal, {edge} rising toward a span edge{first_bad}"
        ),
    })
}

fn deriv_fd(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for("deriv-fd", cfg.seed);
    let mut first = Worst::new();
    let mut second = Worst::new();
    let h1 = 1e-5;
    let h2 = 1e-3;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    for _ in 0..200 {
        let p = random_params(&mut rng, 0.15)?;
        let pp = PlatformPair::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
        let ul = |x: f64| expected_utility_l(PlatformPair::new(x, pp.p_r), &p);
        let ur = |x: f64| expected_utility_r(PlatformPair::new(pp.p_l, x), &p);
        let central = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h1) - f(x - h1)) / (2.0 * h1);
        let stencil = |f: &dyn Fn(f64) -> f64, x: f64| {
            (-f(x + 2.0 * h2) + 16.0 * f(x + h2) - 30.0 * f(x) + 16.0 * f(x - h2) - f(x - 2.0 * h2))
                / (12.0 * h2 * h2)
        };
        let at = || format!("{pp:?} at {p:?}");
        first.update(rel(d_eu_l_d_pl(pp, &p).0, central(&ul, pp.p_l)), at);
        first.update(rel(d_eu_r_d_pr(pp, &p).0, central(&ur, pp.p_r)), at);
        second.update(rel(d2_eu_l_d_pl2(pp, &p).0, stencil(&ul, pp.p_l)), at);
        second.update(rel(d2_eu_r_d_pr2(pp, &p).0, stencil(&ur, pp.p_r)), at);
    }
    let (v1, v2) = (first.value, second.value);
    let mut outcome = first.finish(
        "deriv-fd",
        1e-6,
        false,
        &format!("200 points; error relative to max(1, |value|); second-derivative max {v2:e} (tol 1e-4)"),
    );
    outcome.passed &= v2 <= 1e-4;
    outcome.max_discrepancy = v1;
    Ok(outcome)
}

/// Scores whose means are exact in binary floating point.
pub const EMPIRICAL_FIXTURE: &str = "year,party,score\n\
2002,L,-0.25\n\
2002,L,-0.5\n\
2002,R,0.25\n\
2002,R,0.75\n\
2000,L,-0.5\n\
2000,R,0.5\n\
2004,L,0.125\n";

/// Hand-computed polarization for [`EMPIRICAL_FIXTURE`]; 2004 has no `R` member.
pub const EMPIRICAL_EXPECTED: [(i64, f64); 2] = [(2000, 1.0), (2002, 0.875)];

fn cli_roundtrip(cfg: &VerifyConfig) -> Result<CheckOutcome> {
    let grid = linear_grid(0.0, 2.0, 41);
    let rows = sweep_w(
        &grid,
        &ModelParams::default(),
        SweepMode::Symmetric,
        &cfg.solver,
    )?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).map_err(|e| Error::Domain(e.to_string()))?;
    let back = read_sweep_csv(buf.as_slice()).map_err(|e| Error::Domain(e.to_string()))?;
    let same = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
    let mut mismatches = 0usize;
    if back.len() != rows.len() {
        mismatches += 1;
    }
    for (a, b) in rows.iter().zip(&back) {
        let pairs = [
            (a.w, b.w),
            (a.p_l, b.p_l),
            (a.p_r, b.p_r),
            (a.delta, b.delta),
            (a.pr_l, b.pr_l),
            (a.dpl_dw_analytic, b.dpl_dw_analytic),
            (a.dpl_dw_fd, b.dpl_dw_fd),
            (a.soc_l, b.soc_l),
            (a.soc_r, b.soc_r),
        ];
        mismatches += pairs.iter().filter(|(x, y)| !same(*x, *y)).count();
        mismatches += (a.certified != b.certified) as usize;
    }

    let (records, _) = polarization_series(EMPIRICAL_FIXTURE.as_bytes())
        .map_err(|e| Error::Domain(e.to_string()))?;
    let expected: Vec<PolarizationRecord> = EMPIRICAL_EXPECTED
        .iter()
        .map(|&(year, polarization)| PolarizationRecord { year, polarization })
        .collect();
    let empirical_ok = records == expected;
    Ok(CheckOutcome {
        id: "cli-roundtrip",
        passed: mismatches == 0 && empirical_ok,
        max_discrepancy: mismatches as f64 + (!empirical_ok) as u8 as f64,
        tolerance: 0.0,
        detail: format!(
            "{} sweep rows re-parsed with {mismatches} mismatched values; empirical fixture {}",
            rows.len(),
            if empirical_ok { "exact" } else { "differs" }
        ),
    })
}

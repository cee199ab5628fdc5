//! Implicit-function slopes of the symmetric platform against re-solved
//! finite differences, the sign threshold, the two single-noise limits, and
//! the slope of `p_L + p_R` off the baseline.
//!
//! ```bash
//! cargo run --example comparative_statics
//! ```

use polarsolve::analysis::{prop5_slope_identity, symmetric_platform};
use polarsolve::calculus::{
    dpl_dw_polar, dpl_dw_symmetric, foc_symmetric_polar, slope_sign_threshold, Polar,
};
use polarsolve::model::ModelParams;
use polarsolve::solver::{bisect, solve_asymmetric, SolverConfig};

fn main() -> polarsolve::Result<()> {
    let base = ModelParams::default();
    let h = 1e-4;
    println!(
        "{:>5} {:>14} {:>14} {:>12}",
        "w", "dp/dw (IFT)", "dp/dw (FD)", "threshold"
    );
    for w in [0.0, 0.1, 0.2, 0.5, 1.0, 2.0] {
        let p = base.with_w(w)?;
        let p_l = symmetric_platform(&p, 1e-14)?;
        let at = |x: f64| symmetric_platform(&base.with_w(x).unwrap(), 1e-14).unwrap();
        let fd = if w >= h {
            (at(w + h) - at(w - h)) / (2.0 * h)
        } else {
            (-3.0 * at(w) + 4.0 * at(w + h) - at(w + 2.0 * h)) / (2.0 * h)
        };
        println!(
            "{w:>5} {:>14.9} {:>14.9} {:>12.6}",
            dpl_dw_symmetric(p_l, &p)?,
            fd,
            slope_sign_threshold(p_l, &p)
        );
    }

    for (label, which) in [
        ("valence only", Polar::ValenceOnly),
        ("ideology only", Polar::IdeologyOnly),
    ] {
        let p = base.with_w(1.0)?;
        let (root, _) = bisect(
            |x| foc_symmetric_polar(x, &p, which).unwrap().0,
            0.0,
            0.5,
            1e-14,
        )?;
        println!(
            "{label}: p_L = {root:.9}, dp/dw = {:+.6}",
            dpl_dw_polar(root, &p, which)?
        );
    }

    let cfg = SolverConfig::default();
    let frontrunner = ModelParams::new(1.0, 1.0, 1.0, 1.0, 1.0, -1.0)?;
    let p_l = symmetric_platform(&frontrunner, 1e-14)?;
    let sum = |w: f64| {
        let eq = solve_asymmetric(&frontrunner.with_w(w).unwrap(), &cfg).unwrap();
        eq.platforms.p_l + eq.platforms.p_r
    };
    println!(
        "d(p_L+p_R)/dw at w = 1: identity {:.9}, re-solved {:.9}",
        prop5_slope_identity(p_l, &frontrunner)?,
        (sum(1.0 + h) - sum(1.0 - h)) / (2.0 * h)
    );
    Ok(())
}

//! Brute-force cross-checks: grid best responses, simulated elections, and
//! peak counts on either side of the single-peakedness bound.
//!
//! ```bash
//! cargo run --release --example oracle_checks
//! ```

use polarsolve::model::{ModelParams, Party, PlatformPair};
use polarsolve::oracle::{grid_br_check, mc_check, peak_scan};
use polarsolve::solver::SolverConfig;

fn main() -> polarsolve::Result<()> {
    let cfg = SolverConfig::default();
    let base = ModelParams::default();

    let br = grid_br_check(1.0, Party::L, &base, &cfg, 1e-5)?;
    println!(
        "best response vs grid: |diff| = {:e} (step {:e})",
        br.max_discrepancy, 1e-5
    );

    for (pp, seed) in [
        (PlatformPair::symmetric(0.3), 1),
        (PlatformPair::new(0.5, 1.0), 2),
    ] {
        let mc = mc_check(pp, &base, 1_000_000, seed)?;
        println!(
            "monte carlo at {pp:?}: {:.2} standard errors",
            mc.max_discrepancy
        );
    }

    for sigma_v in [1.0, 0.15, 0.01] {
        let p = base.with_sigma_v(sigma_v)?;
        let v = peak_scan(0.7, Party::L, &p, 1e-4)?;
        println!(
            "sigma_v = {sigma_v}: {} local maxima, guaranteed single-peaked: {}",
            v.n_local_maxima,
            p.single_peaked_guaranteed()
        );
    }
    Ok(())
}

//! Solve the baseline game and compare with the closed-form polarization.
//!
//! ```bash
//! cargo run --example symmetric_equilibrium
//! ```

use polarsolve::analysis::{delta_at_zero, delta_limit_infinity};
use polarsolve::model::ModelParams;
use polarsolve::solver::{solve_symmetric, SolverConfig};

fn main() -> polarsolve::Result<()> {
    let cfg = SolverConfig::default();
    let base = ModelParams::default();
    let eq = solve_symmetric(&base, &cfg)?;
    println!(
        "p_L = {:.12}  p_R = {:.12}",
        eq.platforms.p_l, eq.platforms.p_r
    );
    println!(
        "delta = {:.12}  closed form = {:.12}",
        eq.delta(),
        delta_at_zero(&base)
    );
    println!(
        "residuals = ({:e}, {:e})  soc = ({:.4}, {:.4})  certified = {}",
        eq.foc_residual_l, eq.foc_residual_r, eq.soc_l, eq.soc_r, eq.certified
    );

    let far = base.with_w(1e6)?;
    let eq = solve_symmetric(&far, &cfg)?;
    println!(
        "w = 1e6: delta = {:.6}  limit = {:.6}",
        eq.delta(),
        delta_limit_infinity(&far)
    );
    Ok(())
}

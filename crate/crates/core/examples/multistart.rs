//! Best-response iteration from nine starting profiles. Distinct fixed points
//! would show up as separate equilibria.
//!
//! ```bash
//! cargo run --release --example multistart
//! ```

use polarsolve::model::ModelParams;
use polarsolve::solver::{solve_multistart, SolverConfig};

fn main() -> polarsolve::Result<()> {
    let params = ModelParams::new(0.5, 2.0, 0.7, 0.4, 0.8, -0.6)?;
    let report = solve_multistart(&params, &SolverConfig::default());
    for eq in &report.equilibria {
        println!(
            "p_L = {:.10}  p_R = {:.10}  iterations = {}  certified = {}",
            eq.platforms.p_l, eq.platforms.p_r, eq.iterations, eq.certified
        );
    }
    for (start, err) in &report.failures {
        println!("start {start:?} failed: {err}");
    }
    Ok(())
}

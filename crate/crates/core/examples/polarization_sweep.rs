//! Polarization as a function of the ideological weight `w`, written as CSV
//! to stdout, with the location of its minimum on stderr.
//!
//! ```bash
//! cargo run --release --example polarization_sweep > sweep.csv
//! ```

use polarsolve::analysis::{linear_grid, shape_report, sweep_w, w_tilde, SweepMode};
use polarsolve::cli::write_sweep_csv;
use polarsolve::model::ModelParams;
use polarsolve::solver::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolverConfig::default();
    let base = ModelParams::default();
    let grid = linear_grid(0.0, 3.0, 301);
    let rows = sweep_w(&grid, &base, SweepMode::Symmetric, &cfg)?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;

    let shape = shape_report(&rows)?;
    eprintln!(
        "u-shaped: {}  p_L single-peaked: {}  grid peak: {}  exact peak: {:.9}",
        shape.is_u_shaped,
        shape.is_single_peaked,
        shape.w_tilde,
        w_tilde(&base, &cfg)?
    );
    Ok(())
}

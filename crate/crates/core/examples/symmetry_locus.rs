//! Mean shocks `(mu_i, mu_v)` that admit a symmetric equilibrium, for three
//! ideological weights, each point confirmed by the best-response solver.
//!
//! ```bash
//! cargo run --release --example symmetry_locus
//! ```

use polarsolve::analysis::symmetry_locus_mu_v;
use polarsolve::model::ModelParams;
use polarsolve::solver::{solve_asymmetric, SolverConfig};

fn main() -> polarsolve::Result<()> {
    let cfg = SolverConfig::default();
    println!("w,mu_i,mu_v,p_L+p_R-1");
    for w in [0.5, 1.0, 2.0] {
        for k in 0..=10 {
            let mu_i = k as f64 / 10.0;
            let mu_v = symmetry_locus_mu_v(w, mu_i);
            let params = ModelParams::default()
                .with_w(w)?
                .with_mu_i(mu_i)?
                .with_mu_v(mu_v)?;
            let eq = solve_asymmetric(&params, &cfg)?;
            println!("{w},{mu_i},{mu_v},{:e}", eq.platforms.asymmetry());
        }
    }
    Ok(())
}

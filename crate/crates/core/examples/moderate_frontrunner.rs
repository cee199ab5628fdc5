//! With `mu_i = 1` and `mu_v = -1` party `L` leads on ideology and `R` on
//! valence. Which party moderates depends on which side of `w_hat = 1` the
//! ideological weight lies.
//!
//! ```bash
//! cargo run --release --example moderate_frontrunner
//! ```

use polarsolve::analysis::{classify_moderate, w_hat};
use polarsolve::model::ModelParams;
use polarsolve::solver::SolverConfig;

fn main() -> polarsolve::Result<()> {
    let cfg = SolverConfig::default();
    let base = ModelParams::new(0.0, 1.0, 1.0, 1.0, 1.0, -1.0)?;
    println!("w_hat = {}", w_hat(base.mu_v(), base.mu_i())?);
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>12}  verdict",
        "w", "p_L", "p_R", "delta", "p_L+p_R-1"
    );
    for w in [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0] {
        let report = classify_moderate(&base.with_w(w)?, &cfg)?;
        let pp = report.equilibrium.platforms;
        println!(
            "{w:>5} {:>10.6} {:>10.6} {:>10.6} {:>+12.3e}  {:?}{}",
            pp.p_l,
            pp.p_r,
            pp.polarization(),
            pp.asymmetry(),
            report.verdict,
            if report.agrees() {
                ""
            } else {
                " (solver disagrees)"
            }
        );
    }
    Ok(())
}

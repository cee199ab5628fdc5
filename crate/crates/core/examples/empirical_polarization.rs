//! Yearly polarization from legislator scores with party labels already
//! mapped to `L` and `R`.
//!
//! ```bash
//! cargo run --example empirical_polarization
//! ```

use polarsolve::cli::polarization_series;

const SCORES: &str = "year,party,score
1990,L,-0.31
1990,L,-0.35
1990,R,0.29
1990,R,0.41
2000,L,-0.38
2000,R,0.49
2010,L,-0.40
2010,R,0.62
2010,R,0.66
2020,R,0.70
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (records, warnings) = polarization_series(SCORES.as_bytes())?;
    for r in records {
        println!("{} {:.3}", r.year, r.polarization);
    }
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

//! Quasi-maximum-likelihood fits of all four families to a simulated GQARCH
//! sample of 1257 returns, with a profile of the objective in d.
//!
//! cargo run --release --example qmle_fit

use gqarch::estimate::{profile_objective, qmle_fit, Family, FitOptions};
use gqarch::models::{fixtures, InnovationSpec};
use gqarch::simulate::{simulate_gqarch, SimConfig};

fn main() -> gqarch::Result<()> {
    let spec = fixtures::gqarch_q2(10_000);
    let r = simulate_gqarch(&spec, &InnovationSpec::standard_normal(), &SimConfig::new(1257, 5))?.r;
    let opts = FitOptions::default();
    for family in [Family::Larch, Family::Qarch, Family::Gqarch, Family::Garch11] {
        let fit = qmle_fit(&r, family, &opts)?;
        println!(
            "{family:?}: objective {:.2}, converged {}, {:?}",
            fit.objective, fit.converged, fit.params
        );
    }

    let fit = qmle_fit(&r, Family::Gqarch, &opts)?;
    let d = fit.params.get("d")?;
    let grid: Vec<f64> = (1..10).map(|k| 0.05 * k as f64).collect();
    let prof = profile_objective(&r, &fit.params, "d", &grid, None)?;
    println!("profile in d (fitted {d:.3}):");
    for (g, v) in grid.iter().zip(&prof) {
        println!("  d = {g:.2}: {v:.2}");
    }
    Ok(())
}

//! Leverage function from the fixed-point equation, its sign class, and
//! the sample counterpart.
//!
//! cargo run --release --example leverage

use gqarch::coeffs::power_law_coeffs;
use gqarch::leverage::{classify_signs, leverage_order, solve_leverage};
use gqarch::models::{GqarchSpec, InnovationSpec};
use gqarch::simulate::{simulate_gqarch, SimConfig};
use gqarch::stats::sample_leverage;

fn main() -> gqarch::Result<()> {
    let spec = GqarchSpec::new(0.1, 0.2, power_law_coeffs(-0.1, 0.3, 10_000)?, 0.2)?;
    let innov = InnovationSpec::standard_normal();
    let sol = solve_leverage(&spec, 200, None, 10_000)?;
    println!(
        "solved in {} iterations, |h| = {:.4e} <= bound {:.4e}",
        sol.iterations,
        sol.l2_norm(),
        sol.norm_bound
    );
    println!(
        "class {:?}, leverage of order 20: {}",
        classify_signs(&spec, &innov, 20),
        leverage_order(&sol, 20)?
    );

    let traj = simulate_gqarch(&spec, &innov, &SimConfig::new(500_000, 3))?;
    let emp = sample_leverage(&traj, 5)?;
    for t in 1..=5 {
        println!(
            "h_{t}: theory {:+.5e}, sample {:+.5e} (se {:.1e})",
            sol.h[t - 1],
            emp.values[t - 1],
            emp.se_bands[t - 1]
        );
    }
    Ok(())
}

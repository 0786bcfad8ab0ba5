//! Exact moments of the asymmetric GARCH(1,1) next to a quick simulation.
//!
//! cargo run --release --example garch11_moments

use gqarch::models::{sentana_map, AsymGarch11Spec, InnovationSpec};
use gqarch::moments::{garch11_fourth_via_sentana, garch11_moments};
use gqarch::simulate::{simulate_asym_garch11, SimConfig};
use gqarch::stats::{autocov, leverage_curve};

fn main() -> gqarch::Result<()> {
    let spec = AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3)?;
    let innov = InnovationSpec::standard_normal();
    let m = garch11_moments(&spec, &innov)?;
    println!(
        "m2 = {:.6}, E r^4 = {:.6}, C = {:.6}, rate = {}",
        m.m2, m.m4_0, m.c_const, m.geometric_rate
    );
    println!(
        "E r^4 via {:?}: {:.6}",
        sentana_map(&spec),
        garch11_fourth_via_sentana(&spec, 3.0)
    );

    let traj = simulate_asym_garch11(&spec, &innov, &SimConfig::new(400_000, 1).with_burn_in(1000))?;
    let r2 = traj.r_squared();
    let acov = autocov(&r2, 5)?;
    let lev = leverage_curve(&traj.r, 5)?;
    println!("sample mean r^2 = {:.6}", r2.iter().sum::<f64>() / r2.len() as f64);
    println!(
        "{:>3} {:>10} {:>10} {:>10} {:>10}",
        "t", "rho", "sample", "m3", "sample"
    );
    for t in 1..=5 {
        println!(
            "{t:>3} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            m.rho(t),
            acov.values[t],
            m.m3(t),
            lev.values[t - 1]
        );
    }
    Ok(())
}

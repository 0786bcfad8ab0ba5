//! Volatility paths of the LARCH, QARCH, GQARCH and GARCH(1,1) reference
//! models driven by one common innovation sequence.
//!
//! cargo run --release --example simulate_paths [out_dir]

use gqarch::models::{fixtures, InnovationSpec, ModelSpec};
use gqarch::simulate::{draw_innovations, replicate_rng, simulate_with, SimConfig};

fn main() -> gqarch::Result<()> {
    let out = std::env::args().nth(1);
    let cfg = SimConfig::new(1257, 2024).with_burn_in(5000).with_trunc(5000);
    let zeta = draw_innovations(
        &InnovationSpec::standard_normal(),
        &mut replicate_rng(cfg.seed, 0),
        cfg.total_steps(),
    )?;

    let q1 = fixtures::qarch_q1(5000);
    let q2 = fixtures::gqarch_q2(5000);
    let models = [
        ("L", ModelSpec::Larch(fixtures::larch_l(5000)), None),
        ("Q1", ModelSpec::Qarch(q1.clone()), Some(q1.variance_floor().sqrt())),
        ("Q2", ModelSpec::Gqarch(q2.clone()), Some(q2.variance_floor().sqrt())),
        ("G", ModelSpec::Garch11(fixtures::garch_g()), None),
    ];

    for (label, spec, floor) in &models {
        let traj = simulate_with(spec, &zeta, &cfg)?;
        let sigma = traj.sigma();
        let n = sigma.len() as f64;
        let mean = sigma.iter().sum::<f64>() / n;
        let sd = (sigma.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
        print!(
            "{label:>3}: mean sigma {mean:.5}, sd {sd:.5}, coefficient of variation {:.3}",
            sd / mean
        );
        if let Some(f) = floor {
            let near = sigma.iter().filter(|&&s| s < 1.1 * f).count();
            print!(", threshold {f:.5}, within 10% of it: {near}");
        }
        println!();
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            let mut w = csv::Writer::from_path(format!("{dir}/sigma_{label}.csv"))?;
            w.write_record(["t", "sigma"])?;
            for (t, s) in sigma.iter().enumerate() {
                w.write_record([t.to_string(), s.to_string()])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

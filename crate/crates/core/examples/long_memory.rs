//! Hyperbolic decay of the autocovariance of r^2 and partial-sum variance
//! growth for a long-memory GQARCH, against the asymptotic theory.
//!
//! cargo run --release --example long_memory [replicates]

use gqarch::coeffs::power_law_coeffs;
use gqarch::models::{GqarchSpec, InnovationSpec};
use gqarch::moments::{lm_asymptotics, lm_cov_curve};
use gqarch::simulate::{simulate_gqarch, SimConfig};
use gqarch::stats::{decay_exponent, log_spaced_blocks, partial_sum_variance_scaling, sample_autocov_sq, AutocovCurve};

fn main() -> gqarch::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let n = 1 << 17;
    let burn = 1 << 16;
    let spec = GqarchSpec::new(0.1, 0.02, power_law_coeffs(0.12, 0.35, n + burn)?, 0.4)?;
    let lm = lm_asymptotics(&spec)?;
    println!(
        "kappa1^2 = {:.4e}, kappa2^2 = {:.4e}, slope 2d-1 = {}, 2H = {}",
        lm.kappa1_sq,
        lm.kappa2_sq,
        lm.decay_exponent,
        2.0 * lm.hurst
    );

    let blocks = log_spaced_blocks(64, n / 20, 10);
    let mut sum = vec![0.0; 301];
    let mut exps = Vec::new();
    for k in 0..reps {
        let cfg = SimConfig::new(n, 99)
            .with_trunc(n + burn)
            .with_burn_in(burn)
            .with_replicate(k);
        let traj = simulate_gqarch(&spec, &InnovationSpec::standard_normal(), &cfg)?;
        let c = sample_autocov_sq(&traj, 300)?;
        sum.iter_mut().zip(&c.values).for_each(|(s, v)| *s += v);
        exps.push(partial_sum_variance_scaling(&traj, &blocks)?.0);
    }
    let curve = AutocovCurve {
        lags: (0..=300).collect(),
        values: sum.iter().map(|v| v / reps as f64).collect(),
        n_used: n,
        se_bands: vec![0.0; 301],
    };
    let (slope, se) = decay_exponent(&curve, 10, 300)?;
    println!("log-log slope over lags 10..300: {slope:.3} (ols se {se:.3})");
    println!(
        "cov(200)/cov(100): {:.3} vs {:.3}",
        curve.values[200] / curve.values[100],
        lm_cov_curve(&lm, 200) / lm_cov_curve(&lm, 100)
    );
    println!("variance exponents: {exps:.3?}");
    Ok(())
}

//! Smoothed marginal densities of sigma_t for several values of gamma.
//!
//! cargo run --release --example histograms [out_dir]

use gqarch::app::histogram_export;
use gqarch::models::{fixtures, InnovationSpec};
use gqarch::simulate::SimConfig;

fn main() -> gqarch::Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let spec = fixtures::gqarch_q2(10_000);
    let sim = SimConfig::new(20_000, 8);
    let gammas = [0.0, 0.3, 0.6, 0.7735];
    let curves = histogram_export(
        &spec,
        &gammas,
        &InnovationSpec::standard_normal(),
        &sim,
        256,
        out.as_deref(),
    )?;
    for c in &curves {
        let mode = c.grid[c
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |m| m.0)];
        println!(
            "gamma {:<6}: mean {:.5}, mode {:.5}, skewness {:.2} (median-based {:.3}), share above 2c {:.3}",
            c.gamma, c.mean, mode, c.skewness, c.median_skewness, c.mass_above_2c
        );
    }
    Ok(())
}

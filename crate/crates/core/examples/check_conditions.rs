//! Stationarity and moment conditions for the four reference models.
//!
//! cargo run --example check_conditions

use gqarch::conditions::{check_all, rosenthal_constant};
use gqarch::models::{fixtures, InnovationSpec, ModelSpec};

fn main() -> gqarch::Result<()> {
    let innov = InnovationSpec::standard_normal();
    let models = [
        ("L", ModelSpec::Larch(fixtures::larch_l(10_000))),
        ("Q1", ModelSpec::Qarch(fixtures::qarch_q1(10_000))),
        ("Q2", ModelSpec::Gqarch(fixtures::gqarch_q2(10_000))),
        ("G", ModelSpec::Garch11(fixtures::garch_g())),
    ];
    for (label, spec) in &models {
        println!("== {label} ({})", spec.family_name());
        for r in check_all(spec, &innov)? {
            let mark = if r.satisfied { "ok " } else { "NO " };
            println!("  {mark} {:<32} {:>12.5} < {:<12.5}", r.name, r.lhs, r.rhs);
        }
    }
    let k4 = rosenthal_constant(4.0, None)?;
    println!("K_4 = {:.1} ({:?})", k4.value, k4.provenance);
    Ok(())
}

//! Power-law coefficients `b_j = beta j^{d-1}`, their norms, the smoothed
//! sequences and the series-inversion coefficients.
//!
//! cargo run --example coefficients

use gqarch::coeffs::{gamma_smooth, norm_bp, phi_coeffs, power_law_coeffs};

fn main() -> gqarch::Result<()> {
    let (beta, d, gamma) = (0.2394, 0.2393, 0.7735);
    let seq = power_law_coeffs(beta, d, 100_000)?;
    println!("b_1..b_5 = {:?}", &seq.values()[..5]);

    for p in [2.0, 3.0, 4.0] {
        let n = norm_bp(&seq, p, gamma)?;
        println!(
            "p = {p}: B_p = {:.6}, B_p,gamma = {:.6}, tail <= {:.2e}",
            n.b_p, n.b_p_gamma, n.tail_bound
        );
    }

    let sm = gamma_smooth(&seq, gamma, 10)?;
    println!("b_t,gamma (t = 1..10): {:?}", sm.b_gamma);

    let phi = phi_coeffs(&seq, gamma, 2000)?;
    let sum: f64 = phi.iter().sum();
    let b2 = seq.b2();
    println!(
        "sum phi_k (k <= 2000) = {sum:.5}; limit (1 - gamma)/(1 - gamma - B_2) = {:.5}",
        (1.0 - gamma) / (1.0 - gamma - b2)
    );
    Ok(())
}

//! The leverage function `h_t = cov(sigma_t^2, r_0)` of a GQARCH process,
//! obtained as the fixed point of its linear equation, plus sign
//! classification.

use serde::{Deserialize, Serialize};

use crate::coeffs::{cross_weight_matrix, smooth_unchecked};
use crate::conditions::check_leverage_precondition;
use crate::error::{Error, Result};
use crate::models::{GqarchSpec, InnovationSpec};
use crate::moments::gqarch_m2;

pub const DEFAULT_HORIZON: usize = 200;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverageSolution {
    /// `h[t - 1]` is `h_t`.
    pub h: Vec<f64>,
    pub horizon: usize,
    pub iterations: usize,
    /// Sup-norm of the last update.
    pub residual: f64,
    /// `2|a| m2 B_2^{1/2} / ((1 - gamma)(1 - 3 B_{2,gamma}))`
    pub norm_bound: f64,
    /// Bound on the neglected forward terms `2 sum_{i>T} h_i w_{i,t}`.
    pub truncation_tail: f64,
    pub tol: f64,
}

impl LeverageSolution {
    pub fn l2_norm(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.h.get(i)).copied()
    }
}

/// Default stopping tolerance `1e-12 max(1, |2 a m2|)`.
pub fn default_tol(spec: &GqarchSpec) -> Result<f64> {
    Ok(1e-12 * (2.0 * spec.a * gqarch_m2(spec)?).abs().max(1.0))
}

/// Solves `h_t = 2a m2 b_{t,g} + sum_{0<i<t} h_i b~^2_{t-i,g} + 2 sum_{0<i<=T} h_i w_{i,t,g}`
/// for `t = 1..=horizon` by fixed-point iteration started at zero.
pub fn solve_leverage(
    spec: &GqarchSpec,
    horizon: usize,
    tol: Option<f64>,
    max_iter: usize,
) -> Result<LeverageSolution> {
    if horizon == 0 {
        return Err(Error::domain("leverage horizon must be positive"));
    }
    check_leverage_precondition(spec).require()?;
    let m2 = gqarch_m2(spec)?;
    let tol = match tol {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::domain(format!("tolerance {t} must be positive"))),
        None => default_tol(spec)?,
    };

    let sm = smooth_unchecked(&spec.coeffs, spec.gamma, horizon);
    let w = cross_weight_matrix(&spec.coeffs, spec.gamma, horizon)?;
    let forcing: Vec<f64> = sm.b_gamma.iter().map(|b| 2.0 * spec.a * m2 * b).collect();

    let mut h = vec![0.0; horizon];
    let mut next = vec![0.0; horizon];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        for t in 1..=horizon {
            let mut s = forcing[t - 1];
            for i in 1..t {
                s += h[i - 1] * sm.b_sq_gamma[t - i - 1];
            }
            let row = &w[t - 1];
            let mut cross = 0.0;
            for i in 0..horizon {
                cross += h[i] * row[i];
            }
            next[t - 1] = s + 2.0 * cross;
        }
        residual = h.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut h, &mut next);
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            break;
        }
    }
    if !(residual < tol) {
        return Err(Error::NotConverged { iterations, residual });
    }

    let b2 = spec.coeffs.b2();
    let b2g = spec.b2_gamma();
    let norm_bound = 2.0 * spec.a.abs() * m2 * b2.sqrt() / ((1.0 - spec.gamma) * (1.0 - 3.0 * b2g));
    let head_sq: f64 = (1..=horizon).map(|j| spec.coeffs.get(j).powi(2)).sum();
    let tail_sq = (b2 - head_sq).max(0.0);
    let max_abs = sm.b_abs_gamma.iter().copied().fold(0.0, f64::max);
    Ok(LeverageSolution {
        h,
        horizon,
        iterations,
        residual,
        norm_bound,
        truncation_tail: 2.0 * norm_bound * tail_sq.sqrt() * max_abs,
        tol,
    })
}

/// True when `h_j < 0` for every `1 <= j <= k`.
pub fn leverage_order(sol: &LeverageSolution, k: usize) -> Result<bool> {
    if k == 0 || k > sol.h.len() {
        return Err(Error::Index(format!("order {k} outside 1..={}", sol.h.len())));
    }
    Ok(sol.h[..k].iter().all(|&x| x < 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    /// `h_j < 0` for `j <= k` is guaranteed.
    LeverageK,
    /// `h_j > 0` for `j <= k` is guaranteed.
    PositiveK,
    Indeterminate,
}

/// Applies the sufficient sign conditions without solving: `a b_1 < 0`,
/// `a b_j <= 0` for `j <= k`, and `B_{2,gamma} < 1/5` (mirrored for the
/// positive case). Asymmetric innovations are always indeterminate.
pub fn classify_signs(spec: &GqarchSpec, innov: &InnovationSpec, k: usize) -> SignClass {
    if !innov.is_symmetric_third() || !check_leverage_precondition(spec).satisfied {
        return SignClass::Indeterminate;
    }
    let a = spec.a;
    let first = a * spec.coeffs.get(1);
    // Beyond the stored range a power law keeps the sign of b_1 and a finite
    // sequence is zero, so only stored entries can break the pattern.
    let upto = k.min(spec.coeffs.values().len()).max(1);
    let rest = || (1..=upto).map(|j| a * spec.coeffs.get(j));
    if first < 0.0 && rest().all(|x| x <= 0.0) {
        SignClass::LeverageK
    } else if first > 0.0 && rest().all(|x| x >= 0.0) {
        SignClass::PositiveK
    } else {
        SignClass::Indeterminate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{power_law_coeffs, CoefficientSeq};
    use crate::models::{embed_asym_in_gqarch, AsymGarch11Spec};

    fn embedded() -> GqarchSpec {
        embed_asym_in_gqarch(&AsymGarch11Spec::new(0.1, 0.25, 0.2, 0.1).unwrap())
    }

    #[test]
    fn embedded_garch_closed_form() {
        let s = embedded();
        let sol = solve_leverage(&s, 60, None, DEFAULT_MAX_ITER).unwrap();
        let m2 = gqarch_m2(&s).unwrap();
        for t in 1..=50 {
            let exact = 2.0 * 0.1 * 0.25 * m2 * (0.1f64 + 0.0625).powi(t as i32 - 1);
            assert!((sol.get(t).unwrap() - exact).abs() <= 10.0 * sol.tol);
        }
        assert!(sol.l2_norm() <= sol.norm_bound);
        assert_eq!(sol.truncation_tail, 0.0);
    }

    #[test]
    fn trivial_zero_solutions() {
        let mut s = embedded();
        s.a = 0.0;
        let sol = solve_leverage(&s, 20, None, 100).unwrap();
        assert!(sol.h.iter().all(|&x| x == 0.0));
        let z = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.0]).unwrap(), 0.3).unwrap();
        let sol = solve_leverage(&z, 20, None, 100).unwrap();
        assert!(sol.h.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn precondition_and_iteration_cap() {
        let s = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.5]).unwrap(), 0.3).unwrap();
        assert!(matches!(
            solve_leverage(&s, 20, None, 100),
            Err(Error::Condition { .. })
        ));
        let seq = power_law_coeffs(-0.1, 0.3, 10_000).unwrap();
        let s = GqarchSpec::new(0.1, 0.2, seq, 0.2).unwrap();
        assert!(matches!(
            solve_leverage(&s, 50, None, 1),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn fixed_point_residual_and_sign() {
        let seq = power_law_coeffs(-0.1, 0.3, 10_000).unwrap();
        let s = GqarchSpec::new(0.1, 0.2, seq, 0.2).unwrap();
        let sol = solve_leverage(&s, 100, None, DEFAULT_MAX_ITER).unwrap();
        assert!(sol.residual < sol.tol);
        assert!(sol.l2_norm() <= sol.norm_bound);
        assert!(leverage_order(&sol, 20).unwrap());
        assert_eq!(
            classify_signs(&s, &InnovationSpec::standard_normal(), usize::MAX),
            SignClass::LeverageK
        );
    }

    #[test]
    fn order_definition() {
        let sol = LeverageSolution {
            h: vec![-0.1, -0.05, 0.01],
            horizon: 3,
            iterations: 0,
            residual: 0.0,
            norm_bound: 1.0,
            truncation_tail: 0.0,
            tol: 1e-12,
        };
        assert!(leverage_order(&sol, 2).unwrap());
        assert!(!leverage_order(&sol, 3).unwrap());
        assert!(leverage_order(&sol, 4).is_err());
        assert!(leverage_order(&sol, 0).is_err());
    }

    #[test]
    fn sign_classes() {
        let n = InnovationSpec::standard_normal();
        let pos = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.1]).unwrap(), 0.2).unwrap();
        assert_eq!(classify_signs(&pos, &n, 5), SignClass::PositiveK);
        let mixed = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.1, -0.05]).unwrap(), 0.2).unwrap();
        assert_eq!(classify_signs(&mixed, &n, 5), SignClass::Indeterminate);
        assert_eq!(classify_signs(&mixed, &n, 1), SignClass::PositiveK);
        let big = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![-0.45]).unwrap(), 0.2).unwrap();
        assert_eq!(classify_signs(&big, &n, 1), SignClass::Indeterminate);
        let mut skew = n.clone();
        skew.mu[2] = 0.3;
        assert_eq!(classify_signs(&pos, &skew, 5), SignClass::Indeterminate);
    }
}

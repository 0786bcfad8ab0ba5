//! Closed-form moments: exact second/fourth moments and `r^2` covariances of
//! the asymmetric GARCH(1,1), and the long-memory asymptotics of GQARCH.

use serde::{Deserialize, Serialize};

use crate::conditions::{check_garch11_fourth, check_garch11_variance, check_l2_quadratic};
use crate::error::{Error, Result};
use crate::models::{sentana_map, AsymGarch11Spec, GqarchSpec, InnovationSpec, SentanaParams};
use crate::numeric::beta_fn;

/// Moments of a stationary asymmetric GARCH(1,1) with symmetric innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Garch11Moments {
    /// `E r_t^2`
    pub m2: f64,
    /// `E r_t^4`
    pub m4_0: f64,
    /// `rho(1) = cov(r_0^2, r_1^2)`
    pub c_const: f64,
    /// `gamma + b^2`
    pub geometric_rate: f64,
    /// `m3(1) = E r_1^2 r_0 = 2 a b m2`
    pub m3_1: f64,
}

impl Garch11Moments {
    /// `m3(t) = E r_t^2 r_0`.
    pub fn m3(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.m3_1 * self.geometric_rate.powi(t as i32 - 1)
        }
    }

    /// `rho(t) = cov(r_0^2, r_t^2)`.
    pub fn rho(&self, t: usize) -> f64 {
        if t == 0 {
            self.m4_0 - self.m2 * self.m2
        } else {
            self.c_const * self.geometric_rate.powi(t as i32 - 1)
        }
    }
}

pub fn garch11_moments(spec: &AsymGarch11Spec, innov: &InnovationSpec) -> Result<Garch11Moments> {
    if !innov.is_symmetric_third() {
        return Err(Error::domain("closed-form moments need mu_3 = 0"));
    }
    let mu4 = innov.mu(4);
    check_garch11_variance(spec).require()?;
    check_garch11_fourth(spec, mu4).require()?;

    let (a, b, c, g) = (spec.a, spec.b, spec.c, spec.gamma);
    let b2 = b * b;
    let level = c * c + a * a;
    let m2 = level / (1.0 - b2 - g);
    let denom4 = 1.0 - b2 * b2 * mu4 - (2.0 * b2 * g + g * g);
    let m4_0 = mu4 * m2 / denom4 * (level * (1.0 + b2 + g) + (2.0 * a * b).powi(2));
    let rate = g + b2;
    let c_const = b2 * ((m4_0 - m2 * m2) * (1.0 - g * rate) + 4.0 * a * a * m2 * g) / (1.0 - g * (g + 2.0 * b2));
    Ok(Garch11Moments {
        m2,
        m4_0,
        c_const,
        geometric_rate: rate,
        m3_1: 2.0 * a * b * m2,
    })
}

/// `E r^4` in the `(theta, psi, a11, delta)` parametrization.
pub fn sentana_fourth_moment(p: &SentanaParams, mu4: f64) -> f64 {
    let num = mu4 * p.theta * (p.theta * (1.0 + p.a11 + p.delta) + p.psi * p.psi);
    let den = (1.0 - p.a11 * p.a11 * mu4 - 2.0 * p.a11 * p.delta - p.delta * p.delta) * (1.0 - p.a11 - p.delta);
    num / den
}

/// `E r^4` of `spec` evaluated through the parameter map.
pub fn garch11_fourth_via_sentana(spec: &AsymGarch11Spec, mu4: f64) -> f64 {
    sentana_fourth_moment(&sentana_map(spec), mu4)
}

/// `m3(1..=t_max)` from the moment recursion
/// `m3(t) = 2ab m2 gamma^{t-1} + b^2 sum_{l=0}^{t-2} gamma^l m3(t-l-1)`.
pub fn m3_by_recursion(spec: &AsymGarch11Spec, m2: f64, t_max: usize) -> Vec<f64> {
    let forcing = 2.0 * spec.a * spec.b * m2;
    geometric_convolution(spec.b * spec.b, spec.gamma, forcing, t_max)
}

/// `rho(1..=t_max)` from
/// `rho(t) = b^2 sum_{l=0}^{t-2} gamma^l rho(t-l-1) + C gamma^{t-1}`.
pub fn rho_by_recursion(spec: &AsymGarch11Spec, c_const: f64, t_max: usize) -> Vec<f64> {
    geometric_convolution(spec.b * spec.b, spec.gamma, c_const, t_max)
}

fn geometric_convolution(b2: f64, gamma: f64, forcing: f64, t_max: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let mut s = forcing * gamma.powi(t as i32 - 1);
        let mut g = 1.0;
        for l in 0..t.saturating_sub(1) {
            s += b2 * g * out[t - l - 2];
            g *= gamma;
        }
        out.push(s);
    }
    out
}

/// `E r^2 = (c^2 + a^2) / (1 - gamma - B_2)`.
pub fn gqarch_m2(spec: &GqarchSpec) -> Result<f64> {
    check_l2_quadratic(spec).require()?;
    let b2 = spec.coeffs.b2();
    Ok((spec.c * spec.c + spec.a * spec.a) / (1.0 - spec.gamma - b2))
}

/// Large-lag behaviour of `r_t^2` for power-law coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongMemoryAsymptotics {
    /// Constant in `cov(r_0^2, r_t^2) ~ kappa1_sq t^{2d-1}`.
    pub kappa1_sq: f64,
    /// Scale of the fractional Brownian limit of partial sums of `r_t^2`.
    pub kappa2_sq: f64,
    pub m2: f64,
    /// `Phi_gamma(1) = (1 - gamma) / (1 - gamma - B_2)`
    pub phi_sum: f64,
    pub d: f64,
    /// `2d - 1`
    pub decay_exponent: f64,
    /// `H = d + 1/2`
    pub hurst: f64,
}

pub fn lm_asymptotics(spec: &GqarchSpec) -> Result<LongMemoryAsymptotics> {
    let (Some(beta), Some(d)) = (spec.coeffs.beta(), spec.coeffs.d()) else {
        return Err(Error::domain("long-memory asymptotics need power-law coefficients"));
    };
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::domain(format!("d = {d} outside (0, 1/2)")));
    }
    if spec.a == 0.0 {
        return Err(Error::domain("long-memory asymptotics need a != 0"));
    }
    let m2 = gqarch_m2(spec)?;
    let b2 = spec.coeffs.b2();
    let gap = 1.0 - spec.gamma - b2;
    let kappa1_sq = (2.0 * spec.a * beta / gap).powi(2) * beta_fn(d, 1.0 - 2.0 * d) * m2;
    Ok(LongMemoryAsymptotics {
        kappa1_sq,
        kappa2_sq: kappa1_sq / (d * (1.0 + 2.0 * d)),
        m2,
        phi_sum: (1.0 - spec.gamma) / gap,
        d,
        decay_exponent: 2.0 * d - 1.0,
        hurst: d + 0.5,
    })
}

/// Asymptote `kappa1_sq * t^{2d-1}`; a large-lag approximation only.
pub fn lm_cov_curve(asym: &LongMemoryAsymptotics, t: usize) -> f64 {
    asym.kappa1_sq * (t as f64).powf(asym.decay_exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{phi_coeffs, power_law_coeffs, CoefficientSeq};
    use crate::models::embed_asym_in_gqarch;

    fn reference() -> AsymGarch11Spec {
        AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap()
    }

    #[test]
    fn reference_values() {
        let m = garch11_moments(&reference(), &InnovationSpec::standard_normal()).unwrap();
        assert!((m.m2 - 1.0 / 9.0).abs() < 1e-15);
        assert!((m.m3(1) - 0.0111111).abs() < 1e-7);
        assert!((m.m4_0 - 0.050946).abs() < 1e-6);
        assert!((m.c_const - 0.011041).abs() < 1e-6);
        assert!((m.rho(2) - 0.0060726).abs() < 1e-7);
        assert!((m.rho(2) - 0.55 * m.c_const).abs() < 1e-17);
    }

    #[test]
    fn symmetric_case_has_no_leverage_moment() {
        let s = AsymGarch11Spec::new(0.0, 0.5, 0.2, 0.3).unwrap();
        let m = garch11_moments(&s, &InnovationSpec::standard_normal()).unwrap();
        assert!((1..20).all(|t| m.m3(t) == 0.0));
    }

    #[test]
    fn no_arch_term_kills_covariances() {
        let s = AsymGarch11Spec::new(0.1, 0.0, 0.2, 0.3).unwrap();
        let m = garch11_moments(&s, &InnovationSpec::standard_normal()).unwrap();
        assert_eq!(m.c_const, 0.0);
        assert!((m.m2 - 0.05 / 0.7).abs() < 1e-15);
        assert!((1..10).all(|t| m.rho(t) == 0.0));
    }

    #[test]
    fn fourth_moment_condition_enforced() {
        let s = AsymGarch11Spec::new(0.1, 0.8, 0.2, 0.3).unwrap();
        assert!(matches!(
            garch11_moments(&s, &InnovationSpec::standard_normal()),
            Err(Error::Condition { .. })
        ));
        let skewed = {
            let mut n = InnovationSpec::standard_normal();
            n.mu[2] = 0.5;
            n
        };
        assert!(garch11_moments(&reference(), &skewed).is_err());
    }

    #[test]
    fn recursions_match_closed_forms() {
        let s = reference();
        let m = garch11_moments(&s, &InnovationSpec::standard_normal()).unwrap();
        let m3 = m3_by_recursion(&s, m.m2, 50);
        let rho = rho_by_recursion(&s, m.c_const, 50);
        for t in 1..=50 {
            assert!((m3[t - 1] - m.m3(t)).abs() <= 1e-13 * m.m3(1));
            assert!((rho[t - 1] - m.rho(t)).abs() <= 1e-13 * m.rho(1));
        }
    }

    #[test]
    fn sentana_fourth_agrees() {
        let s = reference();
        let m = garch11_moments(&s, &InnovationSpec::standard_normal()).unwrap();
        let er4 = garch11_fourth_via_sentana(&s, 3.0);
        assert!((m.m4_0 / er4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gqarch_m2_consistency() {
        let s = reference();
        let g = embed_asym_in_gqarch(&s);
        let m = garch11_moments(&s, &InnovationSpec::standard_normal()).unwrap();
        assert!((gqarch_m2(&g).unwrap() - m.m2).abs() < 1e-15);
        let iid = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.0]).unwrap(), 0.0).unwrap();
        assert!((gqarch_m2(&iid).unwrap() - 0.05).abs() < 1e-16);
        let bad = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.9]).unwrap(), 0.3).unwrap();
        assert!(gqarch_m2(&bad).is_err());
    }

    #[test]
    fn asymptotics_parts() {
        let seq = power_law_coeffs(0.1, 0.25, 100_000).unwrap();
        let spec = GqarchSpec::new(0.1, 0.2, seq, 0.3).unwrap();
        let lm = lm_asymptotics(&spec).unwrap();
        let b2 = spec.coeffs.b2();
        let m2 = 0.05 / (0.7 - b2);
        let beta = beta_fn(0.25, 0.5);
        assert!((beta - 5.24412).abs() < 1e-4);
        let expected = (2.0 * 0.1 * 0.1 / (0.7 - b2)).powi(2) * beta * m2;
        assert!((lm.kappa1_sq / expected - 1.0).abs() < 1e-12);
        assert!((lm.kappa2_sq - lm.kappa1_sq / (0.25 * 1.5)).abs() < 1e-18);
        assert_eq!(lm.decay_exponent, -0.5);

        let mut zero = spec.clone();
        zero.gamma = 0.0;
        let lm0 = lm_asymptotics(&zero).unwrap();
        let expected0 = (0.02 / (1.0 - b2)).powi(2) * beta * (0.05 / (1.0 - b2));
        assert!((lm0.kappa1_sq / expected0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotics_domain() {
        let finite = embed_asym_in_gqarch(&reference());
        assert!(lm_asymptotics(&finite).is_err());
        let mut s = GqarchSpec::new(0.1, 0.2, power_law_coeffs(0.1, 0.25, 100).unwrap(), 0.3).unwrap();
        s.a = 0.0;
        assert!(lm_asymptotics(&s).is_err());
    }

    #[test]
    fn cov_curve_ratios() {
        let lm = LongMemoryAsymptotics {
            kappa1_sq: 2.0,
            kappa2_sq: 0.0,
            m2: 1.0,
            phi_sum: 1.0,
            d: 0.352,
            decay_exponent: 2.0 * 0.352 - 1.0,
            hurst: 0.852,
        };
        assert_eq!(lm_cov_curve(&lm, 1), 2.0);
        let ratio = lm_cov_curve(&lm, 200) / lm_cov_curve(&lm, 100);
        assert!((ratio - 2f64.powf(-0.296)).abs() < 1e-12);
        assert!((ratio - 0.8146).abs() < 1e-4);
    }

    #[test]
    fn phi_sum_matches_partial_sums() {
        let s = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.5]).unwrap(), 0.3).unwrap();
        let target: f64 = 0.7 / 0.45;
        assert!((target - 1.55556).abs() < 1e-5);
        let phi = phi_coeffs(&s.coeffs, s.gamma, 400).unwrap();
        let sum: f64 = phi.iter().sum();
        assert!((sum - target).abs() < 1e-10);
    }
}

//! Existence and moment conditions, each reported as `lhs < rhs` with its
//! margin so callers can see how close a specification is to the boundary.

use serde::{Deserialize, Serialize};

use crate::coeffs::{norm_bp, CoefficientSeq};
use crate::error::{Error, Result};
use crate::models::{
    embed_asym_in_gqarch, innovation_moments, AsymGarch11Spec, Garch11Spec, GqarchSpec, InnovationSpec, LarchSpec,
    ModelSpec,
};
use crate::numeric::binomial;

/// Verdict of a strict inequality `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ConditionReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs < rhs,
            margin: rhs - lhs,
            warning: None,
        }
    }

    fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warning = Some(warning.into());
        self
    }

    /// `Err(Error::Condition)` when the verdict is negative.
    pub fn require(&self) -> Result<()> {
        if self.satisfied {
            Ok(())
        } else {
            Err(Error::Condition {
                name: self.name.clone(),
                lhs: self.lhs,
                rhs: self.rhs,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantProvenance {
    ExactPLe2,
    OsekowskiBoundP4,
    UserSupplied,
}

/// Constant `K_p` of the Burkholder-Rosenthal martingale moment inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RosenthalConstant {
    pub p: f64,
    pub value: f64,
    pub provenance: ConstantProvenance,
}

/// Published upper bound for `K_4^{1/4}`.
pub const K4_ROOT_BOUND: f64 = 27.083;

pub fn rosenthal_constant(p: f64, override_value: Option<f64>) -> Result<RosenthalConstant> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("p = {p} must be positive")));
    }
    if let Some(value) = override_value {
        if !(value >= 1.0) {
            return Err(Error::domain(format!("K_p must be at least 1 (got {value})")));
        }
        return Ok(RosenthalConstant {
            p,
            value,
            provenance: ConstantProvenance::UserSupplied,
        });
    }
    if p <= 2.0 {
        Ok(RosenthalConstant {
            p,
            value: 1.0,
            provenance: ConstantProvenance::ExactPLe2,
        })
    } else if p == 4.0 {
        Ok(RosenthalConstant {
            p,
            value: K4_ROOT_BOUND.powi(4),
            provenance: ConstantProvenance::OsekowskiBoundP4,
        })
    } else {
        Err(Error::MissingConstant(p))
    }
}

/// `K_p^{1/p} |mu|_p^{1/p} Lip_Q B_{p,gamma}^{1/p} < 1`.
pub fn check_lp_contraction(
    p: f64,
    mu_abs_p: f64,
    lip_q: f64,
    b_p_gamma: f64,
    k_p: &RosenthalConstant,
) -> ConditionReport {
    let lhs = (k_p.value * mu_abs_p * b_p_gamma).powf(1.0 / p) * lip_q;
    ConditionReport::new(format!("L^{p} contraction"), lhs, 1.0)
}

/// Necessary and sufficient `L^2` condition for quadratic `Q`:
/// `c_2^2 B_{2,gamma} = B_2 / (1 - gamma) < 1`.
pub fn check_l2_quadratic(spec: &GqarchSpec) -> ConditionReport {
    let report = ConditionReport::new("B_{2,gamma} < 1", spec.b2_gamma(), 1.0);
    if spec.a == 0.0 {
        report.with_warning("a = 0: the necessity part does not apply (degenerate level)")
    } else {
        report
    }
}

/// Even-moment condition
/// `sum_{j=2}^p C(p,j) |mu_j| Lip_Q^j sum_k |b_k|^j < (1 - gamma)^{p/2}`.
pub fn check_even_moment(
    p: u32,
    innov: &InnovationSpec,
    lip_q: f64,
    seq: &CoefficientSeq,
    gamma: f64,
) -> Result<ConditionReport> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::domain(format!("moment order p = {p} must be even and >= 2")));
    }
    let mut lhs = 0.0;
    for j in 2..=p {
        let (mu_j, _) = innovation_moments(innov, f64::from(j))?;
        let mu_j = mu_j.expect("integer order");
        if mu_j == 0.0 {
            continue;
        }
        lhs += binomial(p, j) * mu_j.abs() * lip_q.powi(j as i32) * seq.abs_power_sum(f64::from(j));
    }
    Ok(ConditionReport::new(
        format!("even moment p={p}"),
        lhs,
        (1.0 - gamma).powf(f64::from(p) / 2.0),
    ))
}

/// Covariance stationarity of the asymmetric GARCH(1,1): `b^2 + gamma < 1`.
pub fn check_garch11_variance(spec: &AsymGarch11Spec) -> ConditionReport {
    ConditionReport::new("b^2 + gamma < 1", spec.b * spec.b + spec.gamma, 1.0)
}

/// Finite fourth moment: `mu_4 b^4 + 2 b^2 gamma + gamma^2 < 1`.
pub fn check_garch11_fourth(spec: &AsymGarch11Spec, mu4: f64) -> ConditionReport {
    let b2 = spec.b * spec.b;
    ConditionReport::new(
        "mu_4 b^4 + 2 b^2 gamma + gamma^2 < 1",
        mu4 * b2 * b2 + 2.0 * b2 * spec.gamma + spec.gamma * spec.gamma,
        1.0,
    )
}

/// Hypothesis of the leverage sign result: `B_{2,gamma} < 1/5`.
pub fn check_leverage_precondition(spec: &GqarchSpec) -> ConditionReport {
    ConditionReport::new("B_{2,gamma} < 1/5", spec.b2_gamma(), 0.2)
}

/// `B_2 < 1`, the second-moment condition of the LARCH model.
pub fn check_larch_variance(spec: &LarchSpec) -> ConditionReport {
    ConditionReport::new("B_2 < 1", spec.coeffs.b2(), 1.0)
}

pub fn check_classical_garch(spec: &Garch11Spec) -> ConditionReport {
    ConditionReport::new("alpha + beta < 1", spec.persistence(), 1.0)
}

/// Condition whose failure makes a specification unusable for moment-based
/// work (finite variance).
pub fn stationarity_condition(spec: &ModelSpec) -> ConditionReport {
    match spec {
        ModelSpec::Larch(s) => check_larch_variance(s),
        ModelSpec::Qarch(s) | ModelSpec::Gqarch(s) => check_l2_quadratic(s),
        ModelSpec::Garch11(s) => check_classical_garch(s),
        ModelSpec::AsymGarch11(s) => check_garch11_variance(s),
    }
}

/// Every condition that applies to `spec`.
pub fn check_all(spec: &ModelSpec, innov: &InnovationSpec) -> Result<Vec<ConditionReport>> {
    let mut out = vec![stationarity_condition(spec)];
    let quadratic = spec.as_gqarch();
    match spec {
        ModelSpec::Larch(s) => {
            for p in [4u32, 6, 8] {
                out.push(check_even_moment(p, innov, 1.0, &s.coeffs, 0.0)?);
            }
        }
        ModelSpec::Garch11(_) => {}
        ModelSpec::AsymGarch11(s) => {
            out.push(check_garch11_fourth(s, innov.mu(4)));
            out.push(check_l2_quadratic(&embed_asym_in_gqarch(s)));
        }
        ModelSpec::Qarch(_) | ModelSpec::Gqarch(_) => {}
    }
    if let Some(g) = quadratic {
        let k2 = rosenthal_constant(2.0, None)?;
        let k4 = rosenthal_constant(4.0, None)?;
        let n2 = norm_bp(&g.coeffs, 2.0, g.gamma)?;
        let n4 = norm_bp(&g.coeffs, 4.0, g.gamma)?;
        let (_, abs2) = innovation_moments(innov, 2.0)?;
        let (_, abs4) = innovation_moments(innov, 4.0)?;
        out.push(check_lp_contraction(2.0, abs2, g.lip_q(), n2.b_p_gamma, &k2));
        out.push(check_lp_contraction(4.0, abs4, g.lip_q(), n4.b_p_gamma, &k4));
        for p in [2u32, 4, 6] {
            out.push(check_even_moment(p, innov, g.lip_q(), &g.coeffs, g.gamma)?);
        }
        out.push(check_leverage_precondition(&g));
    }
    Ok(out)
}

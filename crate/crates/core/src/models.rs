//! Parameter records for the supported data generating processes and the
//! innovation law with its moment table.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::gamma;

use crate::coeffs::{check_gamma, power_law_coeffs, CoefficientSeq};
use crate::error::{Error, Result};

/// Generalized quadratic ARCH:
/// `sigma_t^2 = c^2 + (a + sum_j b_j r_{t-j})^2 + gamma sigma_{t-1}^2`.
///
/// The volatility kernel is `Q(x) = sqrt(c^2 + x^2)`, so `Lip_Q = 1` and
/// `Q^2(x) <= c^2 + x^2` holds with `c_1 = |c|`, `c_2 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqarchSpec {
    pub a: f64,
    pub c: f64,
    pub coeffs: CoefficientSeq,
    pub gamma: f64,
}

impl GqarchSpec {
    pub fn new(a: f64, c: f64, coeffs: CoefficientSeq, gamma: f64) -> Result<Self> {
        let spec = Self { a, c, coeffs, gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.c.is_finite() {
            return Err(Error::domain("a and c must be finite"));
        }
        if self.c < 0.0 {
            return Err(Error::domain(format!("c = {} must be nonnegative", self.c)));
        }
        check_gamma(self.gamma)
    }

    /// Lipschitz constant of `Q(x) = sqrt(c^2 + x^2)`.
    pub fn lip_q(&self) -> f64 {
        1.0
    }

    /// `(c_1, c_2)` in `Q^2(x) <= c_1^2 + c_2^2 x^2`.
    pub fn q_bound_constants(&self) -> (f64, f64) {
        (self.c.abs(), 1.0)
    }

    /// Deterministic lower bound `c^2 / (1 - gamma)` of `sigma_t^2`.
    pub fn variance_floor(&self) -> f64 {
        self.c * self.c / (1.0 - self.gamma)
    }

    pub fn b2_gamma(&self) -> f64 {
        self.coeffs.b2_gamma(self.gamma)
    }
}

/// Linear ARCH: `sigma_t = a + sum_j b_j r_{t-j}`, which may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LarchSpec {
    pub a: f64,
    pub coeffs: CoefficientSeq,
}

impl LarchSpec {
    pub fn new(a: f64, coeffs: CoefficientSeq) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::domain("a must be finite"));
        }
        Ok(Self { a, coeffs })
    }
}

/// Classical GARCH(1,1): `sigma_t^2 = omega + alpha r_{t-1}^2 + beta_g sigma_{t-1}^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Garch11Spec {
    pub omega: f64,
    pub alpha: f64,
    pub beta_g: f64,
}

impl Garch11Spec {
    pub fn new(omega: f64, alpha: f64, beta_g: f64) -> Result<Self> {
        let spec = Self { omega, alpha, beta_g };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(self.alpha >= 0.0) || !(self.beta_g >= 0.0) {
            return Err(Error::domain(format!(
                "GARCH(1,1) needs omega > 0, alpha >= 0, beta >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta_g
    }

    pub fn is_covariance_stationary(&self) -> bool {
        self.persistence() < 1.0
    }

    /// `omega / (1 - alpha - beta_g)`; infinite when not covariance-stationary.
    pub fn unconditional_variance(&self) -> f64 {
        if self.is_covariance_stationary() {
            self.omega / (1.0 - self.persistence())
        } else {
            f64::INFINITY
        }
    }
}

/// Asymmetric GARCH(1,1): `sigma_t^2 = c^2 + (a + b r_{t-1})^2 + gamma sigma_{t-1}^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymGarch11Spec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
}

impl AsymGarch11Spec {
    pub fn new(a: f64, b: f64, c: f64, gamma: f64) -> Result<Self> {
        let spec = Self { a, b, c, gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.c >= 0.0) {
            return Err(Error::domain(format!("invalid asymmetric GARCH(1,1) {self:?}")));
        }
        check_gamma(self.gamma)
    }
}

/// Parametrization `sigma_t^2 = theta + psi r_{t-1} + a11 r_{t-1}^2 + delta sigma_{t-1}^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentanaParams {
    pub theta: f64,
    pub psi: f64,
    pub a11: f64,
    pub delta: f64,
}

pub fn sentana_map(spec: &AsymGarch11Spec) -> SentanaParams {
    SentanaParams {
        theta: spec.c * spec.c + spec.a * spec.a,
        psi: 2.0 * spec.a * spec.b,
        a11: spec.b * spec.b,
        delta: spec.gamma,
    }
}

/// Inverse of [`sentana_map`]. `b` takes the sign of `psi` (positive when
/// `psi = 0`), so `(a, b)` is recovered up to the joint sign flip
/// `(a, b) -> (-a, -b)`, which leaves the process unchanged.
pub fn sentana_inverse(p: &SentanaParams) -> Result<AsymGarch11Spec> {
    if p.a11 <= 0.0 {
        return Err(Error::domain("inverse map needs a11 > 0"));
    }
    let b = p.a11.sqrt().copysign(if p.psi < 0.0 { -1.0 } else { 1.0 });
    let a = p.psi / (2.0 * b);
    let c2 = p.theta - a * a;
    if c2 < -1e-12 * p.theta.abs().max(1.0) {
        return Err(Error::domain(format!("theta = {} below a^2 = {}", p.theta, a * a)));
    }
    AsymGarch11Spec::new(a, b, c2.max(0.0).sqrt(), p.delta)
}

/// The asymmetric GARCH(1,1) as a GQARCH with `b_1 = b` and no further lags.
pub fn embed_asym_in_gqarch(spec: &AsymGarch11Spec) -> GqarchSpec {
    GqarchSpec {
        a: spec.a,
        c: spec.c,
        coeffs: CoefficientSeq::finite(vec![spec.b]).expect("single finite coefficient"),
        gamma: spec.gamma,
    }
}

/// Tagged union of all model families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Larch(LarchSpec),
    /// GQARCH with `gamma = 0`.
    Qarch(GqarchSpec),
    Gqarch(GqarchSpec),
    Garch11(Garch11Spec),
    AsymGarch11(AsymGarch11Spec),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Larch(s) => LarchSpec::new(s.a, s.coeffs.clone()).map(|_| ()),
            ModelSpec::Qarch(s) => {
                s.validate()?;
                if s.gamma != 0.0 {
                    return Err(Error::domain("qarch family requires gamma = 0"));
                }
                Ok(())
            }
            ModelSpec::Gqarch(s) => s.validate(),
            ModelSpec::Garch11(s) => s.validate(),
            ModelSpec::AsymGarch11(s) => s.validate(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::Larch(_) => "larch",
            ModelSpec::Qarch(_) => "qarch",
            ModelSpec::Gqarch(_) => "gqarch",
            ModelSpec::Garch11(_) => "garch11",
            ModelSpec::AsymGarch11(_) => "asym_garch11",
        }
    }

    /// GQARCH view of the quadratic families.
    pub fn as_gqarch(&self) -> Option<GqarchSpec> {
        match self {
            ModelSpec::Qarch(s) | ModelSpec::Gqarch(s) => Some(s.clone()),
            ModelSpec::AsymGarch11(s) => Some(embed_asym_in_gqarch(s)),
            _ => None,
        }
    }

    /// Hex SHA-256 prefix of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("model specs always serialize");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..16])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationKind {
    StandardNormal,
    Rademacher,
    CustomTable,
}

/// Law of the standardized i.i.d. innovations `zeta_t`.
///
/// `mu[p - 1] = E zeta^p` and `mu_abs[p - 1] = E |zeta|^p` for `p = 1..=8`.
/// The tables may be omitted from JSON for the named laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InnovationRepr")]
pub struct InnovationSpec {
    pub kind: InnovationKind,
    pub mu: Vec<f64>,
    pub mu_abs: Vec<f64>,
}

#[derive(Deserialize)]
struct InnovationRepr {
    kind: InnovationKind,
    mu: Option<Vec<f64>>,
    mu_abs: Option<Vec<f64>>,
}

impl TryFrom<InnovationRepr> for InnovationSpec {
    type Error = Error;

    fn try_from(r: InnovationRepr) -> Result<Self> {
        let named = match r.kind {
            InnovationKind::StandardNormal => Some(Self::standard_normal()),
            InnovationKind::Rademacher => Some(Self::rademacher()),
            InnovationKind::CustomTable => None,
        };
        match (named, r.mu, r.mu_abs) {
            (_, Some(mu), Some(mu_abs)) => Ok(Self {
                kind: r.kind,
                mu,
                mu_abs,
            }),
            (Some(spec), None, None) => Ok(spec),
            _ => Err(Error::domain("give both moment tables, or neither for a named law")),
        }
    }
}

pub const MOMENT_TABLE_LEN: usize = 8;

impl InnovationSpec {
    pub fn standard_normal() -> Self {
        let mu = (1..=MOMENT_TABLE_LEN as u32).map(normal_signed_moment).collect();
        let mu_abs = (1..=MOMENT_TABLE_LEN).map(|p| normal_abs_moment(p as f64)).collect();
        Self {
            kind: InnovationKind::StandardNormal,
            mu,
            mu_abs,
        }
    }

    pub fn rademacher() -> Self {
        Self {
            kind: InnovationKind::Rademacher,
            mu: (1..=MOMENT_TABLE_LEN)
                .map(|p| if p % 2 == 0 { 1.0 } else { 0.0 })
                .collect(),
            mu_abs: vec![1.0; MOMENT_TABLE_LEN],
        }
    }

    /// Table-backed law; only its moments are known, so it cannot be sampled.
    pub fn custom(mu: Vec<f64>, mu_abs: Vec<f64>) -> Result<Self> {
        let spec = Self {
            kind: InnovationKind::CustomTable,
            mu,
            mu_abs,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.len() != MOMENT_TABLE_LEN || self.mu_abs.len() != MOMENT_TABLE_LEN {
            return Err(Error::domain("moment tables must hold p = 1..8"));
        }
        if self.mu[0].abs() > 1e-12 || (self.mu[1] - 1.0).abs() > 1e-12 {
            return Err(Error::domain("innovations must be standardized (mu_1 = 0, mu_2 = 1)"));
        }
        Ok(())
    }

    /// `E zeta^p` for integer `p` in `1..=8`.
    pub fn mu(&self, p: usize) -> f64 {
        self.mu[p - 1]
    }

    pub fn is_symmetric_third(&self) -> bool {
        self.mu[2] == 0.0
    }
}

impl Default for InnovationSpec {
    fn default() -> Self {
        Self::standard_normal()
    }
}

fn normal_signed_moment(p: u32) -> f64 {
    if p % 2 == 1 {
        0.0
    } else {
        // (p - 1)!!
        (1..p).step_by(2).map(f64::from).product()
    }
}

fn normal_abs_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
}

/// `(mu_p, |mu|_p)`; `mu_p` is `None` when `p` is not a positive integer.
pub fn innovation_moments(spec: &InnovationSpec, p: f64) -> Result<(Option<f64>, f64)> {
    if !(p > 0.0) {
        return Err(Error::Lookup(format!("moment order p = {p} must be positive")));
    }
    let integer = (p.fract() == 0.0).then_some(p as usize);
    match spec.kind {
        InnovationKind::StandardNormal => Ok((integer.map(|k| normal_signed_moment(k as u32)), normal_abs_moment(p))),
        InnovationKind::Rademacher => Ok((integer.map(|k| if k % 2 == 0 { 1.0 } else { 0.0 }), 1.0)),
        InnovationKind::CustomTable => match integer {
            Some(k) if (1..=MOMENT_TABLE_LEN).contains(&k) => Ok((Some(spec.mu[k - 1]), spec.mu_abs[k - 1])),
            _ => Err(Error::Lookup(format!("custom moment table has no entry for p = {p}"))),
        },
    }
}

/// Parameter sets fitted to daily S&P 500 returns (n = 1257), used here as
/// simulation fixtures for the four data generating processes.
pub mod fixtures {
    use super::*;

    /// LARCH: `(a, beta, d) = (0.0101, -0.1749, 0.3520)`.
    pub fn larch_l(n_trunc: usize) -> LarchSpec {
        LarchSpec {
            a: 0.0101,
            coeffs: power_law_coeffs(-0.1749, 0.3520, n_trunc).expect("valid fixture"),
        }
    }

    /// QARCH with `gamma = 0`: `(a, c, beta, d) = (0.0058, -0.0101, 0.2099, 0.4648)`;
    /// `c` enters only through `c^2` and is stored as `|c|`.
    pub fn qarch_q1(n_trunc: usize) -> GqarchSpec {
        GqarchSpec {
            a: 0.0058,
            c: 0.0101,
            coeffs: power_law_coeffs(0.2099, 0.4648, n_trunc).expect("valid fixture"),
            gamma: 0.0,
        }
    }

    /// GQARCH: `(a, c, beta, d, gamma) = (0.0020, -0.0049, 0.2394, 0.2393, 0.7735)`,
    /// `c` stored as `|c|`.
    pub fn gqarch_q2(n_trunc: usize) -> GqarchSpec {
        GqarchSpec {
            a: 0.0020,
            c: 0.0049,
            coeffs: power_law_coeffs(0.2394, 0.2393, n_trunc).expect("valid fixture"),
            gamma: 0.7735,
        }
    }

    /// GARCH(1,1): `(omega, alpha, beta) = (0.00001, 0.1306, 0.8346)`.
    pub fn garch_g() -> Garch11Spec {
        Garch11Spec {
            omega: 0.00001,
            alpha: 0.1306,
            beta_g: 0.8346,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentana_examples() {
        let p = sentana_map(&AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap());
        assert!((p.theta - 0.05).abs() < 1e-15);
        assert!((p.psi - 0.1).abs() < 1e-15);
        assert_eq!(p.a11, 0.25);
        assert_eq!(p.delta, 0.3);

        let z = sentana_map(&AsymGarch11Spec::new(0.0, 0.0, 0.0, 0.0).unwrap());
        assert_eq!((z.theta, z.psi, z.a11, z.delta), (0.0, 0.0, 0.0, 0.0));

        let p = sentana_map(&AsymGarch11Spec::new(1.0, -0.4, 0.0, 0.5).unwrap());
        assert_eq!(p.theta, 1.0);
        assert!((p.psi + 0.8).abs() < 1e-15);
        assert!((p.a11 - 0.16).abs() < 1e-15);
        assert_eq!(p.delta, 0.5);
    }

    #[test]
    fn sentana_inverse_sign_convention() {
        let spec = AsymGarch11Spec::new(1.0, -0.4, 0.0, 0.5).unwrap();
        let back = sentana_inverse(&sentana_map(&spec)).unwrap();
        assert!((back.a - 1.0).abs() < 1e-12 && (back.b + 0.4).abs() < 1e-12);
        assert!(back.c.abs() < 1e-7);
        assert!(sentana_inverse(&SentanaParams {
            theta: 1.0,
            psi: 0.0,
            a11: 0.0,
            delta: 0.1
        })
        .is_err());
    }

    #[test]
    fn embedding_has_single_coefficient() {
        let g = embed_asym_in_gqarch(&AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap());
        assert_eq!(g.coeffs.values(), &[0.5]);
        assert_eq!(g.coeffs.tail_kind(), crate::coeffs::TailKind::Finite);
        assert_eq!((g.a, g.c, g.gamma), (0.1, 0.2, 0.3));
        assert_eq!(g.coeffs.get(2), 0.0);
    }

    #[test]
    fn normal_and_rademacher_moments() {
        let n = InnovationSpec::standard_normal();
        assert_eq!(innovation_moments(&n, 4.0).unwrap().0, Some(3.0));
        assert_eq!(innovation_moments(&n, 3.0).unwrap().0, Some(0.0));
        assert_eq!(innovation_moments(&n, 8.0).unwrap().0, Some(105.0));
        let abs3 = innovation_moments(&n, 3.0).unwrap().1;
        assert!((abs3 - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert!((innovation_moments(&n, 2.0).unwrap().1 - 1.0).abs() < 1e-13);
        assert_eq!(innovation_moments(&n, 2.5).unwrap().0, None);

        let r = InnovationSpec::rademacher();
        assert_eq!(innovation_moments(&r, 4.0).unwrap(), (Some(1.0), 1.0));
        assert_eq!(innovation_moments(&r, 3.0).unwrap().0, Some(0.0));
    }

    #[test]
    fn custom_table_lookups() {
        let n = InnovationSpec::standard_normal();
        let c = InnovationSpec::custom(n.mu.clone(), n.mu_abs.clone()).unwrap();
        assert_eq!(innovation_moments(&c, 6.0).unwrap().0, Some(15.0));
        assert!(matches!(innovation_moments(&c, 9.0), Err(Error::Lookup(_))));
        assert!(matches!(innovation_moments(&c, 1.5), Err(Error::Lookup(_))));
        let mut bad = n.mu.clone();
        bad[1] = 2.0;
        assert!(InnovationSpec::custom(bad, n.mu_abs).is_err());
    }

    #[test]
    fn model_spec_json_uses_family_tag() {
        let m = ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap());
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains(r#""family":"asym_garch11""#), "{json}");
        let back: ModelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.fingerprint().len(), 32);
    }

    #[test]
    fn qarch_requires_zero_gamma() {
        let mut q = fixtures::qarch_q1(100);
        assert!(ModelSpec::Qarch(q.clone()).validate().is_ok());
        q.gamma = 0.2;
        assert!(ModelSpec::Qarch(q).validate().is_err());
    }

    #[test]
    fn constructor_rejects_bad_domains() {
        let b = CoefficientSeq::finite(vec![0.1]).unwrap();
        assert!(GqarchSpec::new(0.1, -0.2, b.clone(), 0.3).is_err());
        assert!(GqarchSpec::new(0.1, 0.2, b, 1.0).is_err());
        assert!(Garch11Spec::new(0.0, 0.1, 0.8).is_err());
        assert!(AsymGarch11Spec::new(0.1, 0.5, 0.2, -0.1).is_err());
    }

    #[test]
    fn named_innovations_need_no_tables() {
        let n: InnovationSpec = serde_json::from_str(r#"{"kind": "standard_normal"}"#).unwrap();
        assert_eq!(n, InnovationSpec::standard_normal());
        let r: InnovationSpec = serde_json::from_str(r#"{"kind": "rademacher"}"#).unwrap();
        assert_eq!(r, InnovationSpec::rademacher());
        assert!(serde_json::from_str::<InnovationSpec>(r#"{"kind": "custom_table"}"#).is_err());
        let text = serde_json::to_string(&InnovationSpec::standard_normal()).unwrap();
        assert_eq!(
            serde_json::from_str::<InnovationSpec>(&text).unwrap(),
            InnovationSpec::standard_normal()
        );
    }
}

//! Moving-average coefficient sequences `b_j` and the series transforms built
//! from them: `B_p` norms, geometric smoothing by the volatility persistence
//! `gamma`, cross weights of the leverage equation, and the convolution
//! inverse `phi` of `1 - sum_j b~^2_{j,gamma} z^j`.
//!
//! Indices follow the model's convention: `b_1` is the first coefficient.
//! Every infinite series is truncated at the stored length and, for
//! hyperbolic sequences, reported together with an integral tail bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{kahan_sum, CompensatedSum};

/// Truncation used when a sequence feeds a simulation.
pub const DEFAULT_SIM_TRUNC: usize = 10_000;
/// Truncation used when a sequence only feeds norm computations.
pub const DEFAULT_NORM_TRUNC: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `b_j = beta * j^(d-1)` for every `j`, including beyond the stored range.
    PowerLaw { beta: f64, d: f64 },
    /// `b_j = 0` beyond the stored range.
    Finite,
}

/// Truncated coefficient sequence `b_1, ..., b_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoeffRepr", into = "CoeffRepr")]
pub struct CoefficientSeq {
    values: Vec<f64>,
    tail: TailKind,
}

/// Wire form: power-law sequences are stored by their parameters only, since
/// the values are a deterministic function of them.
#[derive(Serialize, Deserialize)]
#[serde(tag = "tail_kind", rename_all = "snake_case")]
enum CoeffRepr {
    PowerLaw { beta: f64, d: f64, n_trunc: usize },
    Finite { values: Vec<f64> },
}

impl TryFrom<CoeffRepr> for CoefficientSeq {
    type Error = Error;

    fn try_from(repr: CoeffRepr) -> Result<Self> {
        match repr {
            CoeffRepr::PowerLaw { beta, d, n_trunc } => power_law_coeffs(beta, d, n_trunc),
            CoeffRepr::Finite { values } => CoefficientSeq::finite(values),
        }
    }
}

impl From<CoefficientSeq> for CoeffRepr {
    fn from(seq: CoefficientSeq) -> Self {
        match seq.tail {
            TailKind::PowerLaw { beta, d } => CoeffRepr::PowerLaw {
                beta,
                d,
                n_trunc: seq.values.len(),
            },
            TailKind::Finite => CoeffRepr::Finite { values: seq.values },
        }
    }
}

/// `b_j = beta * j^(d-1)` for `j = 1..=n_trunc`.
pub fn power_law_coeffs(beta: f64, d: f64, n_trunc: usize) -> Result<CoefficientSeq> {
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::domain(format!("memory parameter d = {d} outside (0, 1/2)")));
    }
    if n_trunc < 1 {
        return Err(Error::domain("truncation length must be at least 1"));
    }
    if !beta.is_finite() {
        return Err(Error::domain("beta must be finite"));
    }
    let values = (1..=n_trunc).map(|j| power_law_value(beta, d, j)).collect();
    Ok(CoefficientSeq {
        values,
        tail: TailKind::PowerLaw { beta, d },
    })
}

#[inline]
fn power_law_value(beta: f64, d: f64, j: usize) -> f64 {
    beta * (j as f64).powf(d - 1.0)
}

impl CoefficientSeq {
    /// Finitely supported sequence `b_1..b_N`, zero afterwards.
    pub fn finite(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("coefficient sequence must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(Self {
            values,
            tail: TailKind::Finite,
        })
    }

    /// Same sequence with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let tail = match self.tail {
            TailKind::PowerLaw { beta, d } => TailKind::PowerLaw { beta: beta * factor, d },
            TailKind::Finite => TailKind::Finite,
        };
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            tail,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_trunc(&self) -> usize {
        self.values.len()
    }

    pub fn tail_kind(&self) -> TailKind {
        self.tail
    }

    pub fn beta(&self) -> Option<f64> {
        match self.tail {
            TailKind::PowerLaw { beta, .. } => Some(beta),
            TailKind::Finite => None,
        }
    }

    pub fn d(&self) -> Option<f64> {
        match self.tail {
            TailKind::PowerLaw { d, .. } => Some(d),
            TailKind::Finite => None,
        }
    }

    /// `b_j` for `j >= 1`. Past the stored range this is the analytic
    /// power-law value or zero for finite sequences. `b_0` is taken as zero.
    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        match self.values.get(j - 1) {
            Some(v) => *v,
            None => match self.tail {
                TailKind::PowerLaw { beta, d } => power_law_value(beta, d, j),
                TailKind::Finite => 0.0,
            },
        }
    }

    /// Truncated `sum_{j<=N} |b_j|^q` with compensated accumulation.
    pub fn abs_power_sum(&self, q: f64) -> f64 {
        if q == 2.0 {
            kahan_sum(self.values.iter().map(|v| v * v))
        } else {
            kahan_sum(self.values.iter().map(|v| v.abs().powf(q)))
        }
    }

    /// `B_2 = sum b_j^2` over the stored range.
    pub fn b2(&self) -> f64 {
        self.abs_power_sum(2.0)
    }

    /// `B_{2,gamma} = B_2 / (1 - gamma)`.
    pub fn b2_gamma(&self, gamma: f64) -> f64 {
        self.b2() / (1.0 - gamma)
    }

    /// Upper bound on the omitted `sum_{j>N} |b_j|^q` for power-law tails,
    /// zero for finite sequences and infinity when the series diverges.
    pub fn tail_power_sum_bound(&self, q: f64) -> f64 {
        match self.tail {
            TailKind::Finite => 0.0,
            TailKind::PowerLaw { beta, d } => {
                let expo = (d - 1.0) * q;
                if expo >= -1.0 {
                    return f64::INFINITY;
                }
                let n = self.values.len() as f64;
                beta.abs().powf(q) * n.powf(expo + 1.0) / (-(expo + 1.0))
            }
        }
    }
}

/// `B_p` and `B_{p,gamma}` with the truncation error bound on `B_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesNorm {
    pub b_p: f64,
    pub b_p_gamma: f64,
    /// Bound on `B_p(infinite) - B_p(truncated)`.
    pub tail_bound: f64,
}

pub fn norm_bp(seq: &CoefficientSeq, p: f64, gamma: f64) -> Result<SeriesNorm> {
    if !(p > 0.0) {
        return Err(Error::domain(format!("norm order p = {p} must be positive")));
    }
    check_gamma(gamma)?;
    let (b_p, tail_bound, factor) = if p < 2.0 {
        let s = seq.abs_power_sum(p);
        let tail = seq.tail_power_sum_bound(p);
        (s, tail, 1.0 / (1.0 - gamma.powf(p / 2.0)))
    } else {
        let s = seq.b2();
        let tail = seq.tail_power_sum_bound(2.0);
        let b_p = s.powf(p / 2.0);
        let tail_p = (s + tail).powf(p / 2.0) - b_p;
        (b_p, tail_p, 1.0 / (1.0 - gamma).powf(p / 2.0))
    };
    Ok(SeriesNorm {
        b_p,
        b_p_gamma: b_p * factor,
        tail_bound,
    })
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::domain(format!("gamma = {gamma} outside [0, 1)")));
    }
    Ok(())
}

/// Geometrically smoothed sequences. Entry `t - 1` holds the value at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSeq {
    /// `b_{t,gamma} = sum_{j<t} gamma^j b_{t-j}`
    pub b_gamma: Vec<f64>,
    /// `|b|_{t,gamma} = sum_{j<t} gamma^j |b_{t-j}|`
    pub b_abs_gamma: Vec<f64>,
    /// `b~^2_{t,gamma} = sum_{j<t} gamma^j b^2_{t-j}`
    pub b_sq_gamma: Vec<f64>,
    pub gamma: f64,
}

pub fn gamma_smooth(seq: &CoefficientSeq, gamma: f64, horizon: usize) -> Result<SmoothedSeq> {
    check_gamma(gamma)?;
    if horizon > seq.n_trunc() {
        return Err(Error::Index(format!(
            "horizon {horizon} exceeds truncation {}",
            seq.n_trunc()
        )));
    }
    Ok(smooth_unchecked(seq, gamma, horizon))
}

/// Smoothing over any horizon, reading past the stored range through
/// [`CoefficientSeq::get`].
pub(crate) fn smooth_unchecked(seq: &CoefficientSeq, gamma: f64, horizon: usize) -> SmoothedSeq {
    let mut b_gamma = Vec::with_capacity(horizon);
    let mut b_abs_gamma = Vec::with_capacity(horizon);
    let mut b_sq_gamma = Vec::with_capacity(horizon);
    let (mut s, mut sa, mut sq) = (0.0, 0.0, 0.0);
    for t in 1..=horizon {
        let b = seq.get(t);
        s = b + gamma * s;
        sa = b.abs() + gamma * sa;
        sq = b * b + gamma * sq;
        b_gamma.push(s);
        b_abs_gamma.push(sa);
        b_sq_gamma.push(sq);
    }
    SmoothedSeq {
        b_gamma,
        b_abs_gamma,
        b_sq_gamma,
        gamma,
    }
}

/// `w_{i,t,gamma} = sum_{l<t} gamma^l b_{t-l} b_{i+t-l}`.
pub fn cross_weights(seq: &CoefficientSeq, gamma: f64, i: usize, t: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if i < 1 || t < 1 {
        return Err(Error::Index(format!("cross weight needs i, t >= 1 (got i={i}, t={t})")));
    }
    let mut acc = CompensatedSum::new();
    let mut g = 1.0;
    for l in 0..t {
        acc.add(g * seq.get(t - l) * seq.get(i + t - l));
        g *= gamma;
    }
    Ok(acc.value())
}

/// Row-major `w[t-1][i-1]` for `1 <= i, t <= horizon`, via
/// `w_{i,t} = gamma w_{i,t-1} + b_t b_{i+t}`.
pub fn cross_weight_matrix(seq: &CoefficientSeq, gamma: f64, horizon: usize) -> Result<Vec<Vec<f64>>> {
    check_gamma(gamma)?;
    let b: Vec<f64> = (0..=2 * horizon).map(|j| seq.get(j)).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(horizon);
    let mut prev = vec![0.0; horizon];
    for t in 1..=horizon {
        let row: Vec<f64> = (1..=horizon).map(|i| gamma * prev[i - 1] + b[t] * b[i + t]).collect();
        prev.clone_from(&row);
        rows.push(row);
    }
    Ok(rows)
}

/// Coefficients `phi_0..phi_order` of `(1 - sum_j b~^2_{j,gamma} z^j)^{-1}`.
pub fn phi_coeffs(seq: &CoefficientSeq, gamma: f64, order: usize) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    let b2g = seq.b2_gamma(gamma);
    if b2g >= 1.0 {
        return Err(Error::Condition {
            name: "B_{2,gamma} < 1".into(),
            lhs: b2g,
            rhs: 1.0,
        });
    }
    let alpha = smooth_unchecked(seq, gamma, order).b_sq_gamma;
    let mut phi = Vec::with_capacity(order + 1);
    phi.push(1.0);
    phi.extend(convolution_inverse_tail(&alpha, order));
    Ok(phi)
}

/// `A_k = alpha_k + sum_{0<i<k} alpha_i A_{k-i}` for `k = 1..=k_max`.
/// Input `alpha[0]` is `alpha_1`; entry `k - 1` of the output is `A_k`.
pub fn renewal_ak(alpha: &[f64], k_max: usize) -> Result<Vec<f64>> {
    if alpha.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::domain("renewal weights must be nonnegative"));
    }
    let total = kahan_sum(alpha.iter().copied());
    if total >= 1.0 {
        return Err(Error::Condition {
            name: "sum alpha_j < 1".into(),
            lhs: total,
            rhs: 1.0,
        });
    }
    Ok(convolution_inverse_tail(alpha, k_max))
}

fn convolution_inverse_tail(alpha: &[f64], k_max: usize) -> Vec<f64> {
    let a = |k: usize| alpha.get(k - 1).copied().unwrap_or(0.0);
    let mut out: Vec<f64> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut acc = CompensatedSum::new();
        acc.add(a(k));
        for i in 1..k {
            acc.add(a(i) * out[k - i - 1]);
        }
        out.push(acc.value());
    }
    out
}

//! Gaussian quasi-maximum-likelihood fitting of LARCH, QARCH, GQARCH and
//! GARCH(1,1) models to an observed return series.
//!
//! The objective is
//! `L(theta) = sum_{t >= t0} [log s_t^2(theta) + r_t^2 / s_t^2(theta)]`
//! with the volatility recursion run on the data from a zero pre-sample,
//! `t0 = max(50, window / 10)` and `s_t^2` floored at `1e-10`. The power-law
//! moving average is one FFT convolution per evaluation.
//!
//! Parameters are optimized in unconstrained coordinates: logs for `a`, `c`
//! and `omega`, a logistic map for `gamma` and `2d`, and for GARCH(1,1) a
//! logistic persistence `alpha + beta` with a logistic ARCH share. Since the
//! quadratic and LARCH likelihoods are unchanged by `(a, beta) -> (-a, -beta)`,
//! `a > 0` is imposed.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::coeffs::{power_law_coeffs, DEFAULT_SIM_TRUNC};
use crate::error::{Error, Result};
use crate::models::{Garch11Spec, GqarchSpec, LarchSpec, ModelSpec};
use crate::optim::{nelder_mead, NelderMeadOptions};

pub const VARIANCE_FLOOR: f64 = 1e-10;
pub const MIN_SERIES_LEN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Larch,
    Qarch,
    Gqarch,
    Garch11,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "larch" => Ok(Family::Larch),
            "qarch" => Ok(Family::Qarch),
            "gqarch" => Ok(Family::Gqarch),
            "garch11" | "garch" => Ok(Family::Garch11),
            other => Err(Error::domain(format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedParams {
    Larch {
        a: f64,
        beta: f64,
        d: f64,
    },
    Qarch {
        a: f64,
        c: f64,
        beta: f64,
        d: f64,
    },
    Gqarch {
        a: f64,
        c: f64,
        beta: f64,
        d: f64,
        gamma: f64,
    },
    Garch11 {
        omega: f64,
        alpha: f64,
        beta: f64,
    },
}

impl FittedParams {
    pub fn family(&self) -> Family {
        match self {
            FittedParams::Larch { .. } => Family::Larch,
            FittedParams::Qarch { .. } => Family::Qarch,
            FittedParams::Gqarch { .. } => Family::Gqarch,
            FittedParams::Garch11 { .. } => Family::Garch11,
        }
    }

    pub fn names(&self) -> &'static [&'static str] {
        match self {
            FittedParams::Larch { .. } => &["a", "beta", "d"],
            FittedParams::Qarch { .. } => &["a", "c", "beta", "d"],
            FittedParams::Gqarch { .. } => &["a", "c", "beta", "d", "gamma"],
            FittedParams::Garch11 { .. } => &["omega", "alpha", "beta"],
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        let v = match (self, name) {
            (FittedParams::Larch { a, .. } | FittedParams::Qarch { a, .. } | FittedParams::Gqarch { a, .. }, "a") => *a,
            (FittedParams::Qarch { c, .. } | FittedParams::Gqarch { c, .. }, "c") => *c,
            (
                FittedParams::Larch { beta, .. }
                | FittedParams::Qarch { beta, .. }
                | FittedParams::Gqarch { beta, .. }
                | FittedParams::Garch11 { beta, .. },
                "beta",
            ) => *beta,
            (FittedParams::Larch { d, .. } | FittedParams::Qarch { d, .. } | FittedParams::Gqarch { d, .. }, "d") => *d,
            (FittedParams::Gqarch { gamma, .. }, "gamma") => *gamma,
            (FittedParams::Garch11 { omega, .. }, "omega") => *omega,
            (FittedParams::Garch11 { alpha, .. }, "alpha") => *alpha,
            _ => return Err(Error::domain(format!("no parameter `{name}` in {:?}", self.family()))),
        };
        Ok(v)
    }

    /// Copy with one parameter replaced; the value must lie in its domain.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        self.get(name)?;
        let mut out = *self;
        match (&mut out, name) {
            (FittedParams::Larch { a, .. } | FittedParams::Qarch { a, .. } | FittedParams::Gqarch { a, .. }, "a") => {
                *a = value
            }
            (FittedParams::Qarch { c, .. } | FittedParams::Gqarch { c, .. }, "c") => *c = value,
            (
                FittedParams::Larch { beta, .. }
                | FittedParams::Qarch { beta, .. }
                | FittedParams::Gqarch { beta, .. }
                | FittedParams::Garch11 { beta, .. },
                "beta",
            ) => *beta = value,
            (FittedParams::Larch { d, .. } | FittedParams::Qarch { d, .. } | FittedParams::Gqarch { d, .. }, "d") => {
                *d = value
            }
            (FittedParams::Gqarch { gamma, .. }, "gamma") => *gamma = value,
            (FittedParams::Garch11 { omega, .. }, "omega") => *omega = value,
            (FittedParams::Garch11 { alpha, .. }, "alpha") => *alpha = value,
            _ => unreachable!("name checked by get"),
        }
        out.check_domain()?;
        Ok(out)
    }

    pub fn check_domain(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::domain(format!("{what} outside its domain in {self:?}")));
        match *self {
            FittedParams::Larch { a, beta, d } => {
                if !(a > 0.0) || !beta.is_finite() || !(d > 0.0 && d < 0.5) {
                    return bad("a, beta or d");
                }
            }
            FittedParams::Qarch { a, c, beta, d } | FittedParams::Gqarch { a, c, beta, d, .. } => {
                if !(a > 0.0) || !(c > 0.0) || !beta.is_finite() || !(d > 0.0 && d < 0.5) {
                    return bad("a, c, beta or d");
                }
                if let FittedParams::Gqarch { gamma, .. } = *self {
                    if !(gamma > 0.0 && gamma < 1.0) {
                        return bad("gamma");
                    }
                }
            }
            FittedParams::Garch11 { omega, alpha, beta } => {
                if !(omega > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !(alpha + beta < 1.0) {
                    return bad("omega, alpha or beta");
                }
            }
        }
        Ok(())
    }

    /// Unconstrained coordinates.
    fn to_raw(self) -> Vec<f64> {
        match self {
            FittedParams::Larch { a, beta, d } => vec![a.ln(), beta, logit(2.0 * d)],
            FittedParams::Qarch { a, c, beta, d } => vec![a.ln(), c.ln(), beta, logit(2.0 * d)],
            FittedParams::Gqarch { a, c, beta, d, gamma } => {
                vec![a.ln(), c.ln(), beta, logit(2.0 * d), logit(gamma)]
            }
            FittedParams::Garch11 { omega, alpha, beta } => {
                let p = alpha + beta;
                vec![omega.ln(), logit(p), logit(alpha / p)]
            }
        }
    }

    fn from_raw(family: Family, u: &[f64]) -> Self {
        match family {
            Family::Larch => FittedParams::Larch {
                a: u[0].exp(),
                beta: u[1],
                d: 0.5 * logistic(u[2]),
            },
            Family::Qarch => FittedParams::Qarch {
                a: u[0].exp(),
                c: u[1].exp(),
                beta: u[2],
                d: 0.5 * logistic(u[3]),
            },
            Family::Gqarch => FittedParams::Gqarch {
                a: u[0].exp(),
                c: u[1].exp(),
                beta: u[2],
                d: 0.5 * logistic(u[3]),
                gamma: logistic(u[4]),
            },
            Family::Garch11 => {
                let p = logistic(u[1]);
                let s = logistic(u[2]);
                FittedParams::Garch11 {
                    omega: u[0].exp(),
                    alpha: p * s,
                    beta: p * (1.0 - s),
                }
            }
        }
    }

    /// The fitted model as a simulation spec with `n_trunc` coefficients.
    pub fn to_model_spec(&self, n_trunc: usize) -> Result<ModelSpec> {
        Ok(match *self {
            FittedParams::Larch { a, beta, d } => {
                ModelSpec::Larch(LarchSpec::new(a, power_law_coeffs(beta, d, n_trunc)?)?)
            }
            FittedParams::Qarch { a, c, beta, d } => {
                ModelSpec::Qarch(GqarchSpec::new(a, c, power_law_coeffs(beta, d, n_trunc)?, 0.0)?)
            }
            FittedParams::Gqarch { a, c, beta, d, gamma } => {
                ModelSpec::Gqarch(GqarchSpec::new(a, c, power_law_coeffs(beta, d, n_trunc)?, gamma)?)
            }
            FittedParams::Garch11 { omega, alpha, beta } => ModelSpec::Garch11(Garch11Spec::new(omega, alpha, beta)?),
        })
    }
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Moving-average truncation; `None` means `min(n, 10_000)`.
    pub window: Option<usize>,
    pub optimizer: NelderMeadOptions,
    /// Overrides the built-in start grid.
    pub starts: Option<Vec<FittedParams>>,
    /// Run starts on the rayon pool.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FittedParams,
    /// Negative quasi-log-likelihood (up to constants) at `params`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start_points_tried: usize,
    /// Time points whose variance hit the floor.
    pub floored_points: usize,
    pub window: usize,
    pub first_term: usize,
}

/// Precomputed data for repeated objective evaluation on one series.
pub struct QmleProblem {
    r: Vec<f64>,
    r_hat: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    window: usize,
    t0: usize,
    sample_var: f64,
}

impl QmleProblem {
    pub fn new(series: &[f64], window: Option<usize>) -> Result<Self> {
        let n = series.len();
        if n < MIN_SERIES_LEN {
            return Err(Error::domain(format!(
                "series has {n} points, need at least {MIN_SERIES_LEN}"
            )));
        }
        if let Some(i) = series.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at position {i}")));
        }
        let mean = series.iter().sum::<f64>() / n as f64;
        let sample_var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let second = series.iter().map(|v| v * v).sum::<f64>() / n as f64;
        if !(sample_var > 0.0) || !(second > 0.0) {
            return Err(Error::DegenerateSeries("series has zero variance".into()));
        }
        let window = window.unwrap_or(n.min(DEFAULT_SIM_TRUNC)).clamp(1, n);
        let t0 = (window / 10).max(50);
        if t0 >= n {
            return Err(Error::domain(format!(
                "first likelihood term {t0} beyond series length {n}"
            )));
        }
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut r_hat: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
        r_hat.resize(len, Complex::new(0.0, 0.0));
        forward.process(&mut r_hat);
        Ok(Self {
            r: series.to_vec(),
            r_hat,
            forward,
            inverse,
            window,
            t0,
            sample_var: second,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn first_term(&self) -> usize {
        self.t0
    }

    /// `X_t = beta sum_{j=1}^{min(t, window)} j^{d-1} r_{t-j}`.
    fn moving_average(&self, beta: f64, d: f64) -> Vec<f64> {
        let len = self.r_hat.len();
        let mut k = vec![Complex::new(0.0, 0.0); len];
        for (j, slot) in k.iter_mut().enumerate().take(self.window + 1).skip(1) {
            *slot = Complex::new((j as f64).powf(d - 1.0), 0.0);
        }
        self.forward.process(&mut k);
        for (x, r) in k.iter_mut().zip(&self.r_hat) {
            *x *= r;
        }
        self.inverse.process(&mut k);
        let scale = beta / len as f64;
        k[..self.r.len()].iter().map(|c| c.re * scale).collect()
    }

    /// Conditional variance path and the number of floored points.
    pub fn variance_path(&self, p: &FittedParams) -> (Vec<f64>, usize) {
        let n = self.r.len();
        let mut out = Vec::with_capacity(n);
        match *p {
            FittedParams::Larch { a, beta, d } => {
                for x in self.moving_average(beta, d) {
                    let s = a + x;
                    out.push(s * s);
                }
            }
            FittedParams::Qarch { a, c, beta, d } => {
                for x in self.moving_average(beta, d) {
                    out.push(c * c + (a + x).powi(2));
                }
            }
            FittedParams::Gqarch { a, c, beta, d, gamma } => {
                let mut prev = self.sample_var;
                for x in self.moving_average(beta, d) {
                    let v = c * c + (a + x).powi(2) + gamma * prev;
                    out.push(v);
                    prev = v;
                }
            }
            FittedParams::Garch11 { omega, alpha, beta } => {
                let mut prev = self.sample_var;
                let mut prev_r2 = self.sample_var;
                for &r in &self.r {
                    let v = omega + alpha * prev_r2 + beta * prev;
                    out.push(v);
                    prev = v;
                    prev_r2 = r * r;
                }
            }
        }
        let mut floored = 0;
        for v in out.iter_mut() {
            if !(*v >= VARIANCE_FLOOR) {
                *v = VARIANCE_FLOOR;
                floored += 1;
            }
        }
        (out, floored)
    }

    pub fn objective(&self, p: &FittedParams) -> f64 {
        let (v, _) = self.variance_path(p);
        let mut s = 0.0;
        for (r, v) in self.r[self.t0..].iter().zip(&v[self.t0..]) {
            s += v.ln() + r * r / v;
        }
        if s.is_finite() {
            s
        } else {
            f64::INFINITY
        }
    }

    /// Start grid anchored on the sample second moment `v`, so rescaling the
    /// series rescales every start.
    pub fn default_starts(&self, family: Family) -> Vec<FittedParams> {
        let v = self.sample_var;
        let b2 =
            |beta: f64, d: f64| beta * beta * (1..=self.window).map(|j| (j as f64).powf(2.0 * d - 2.0)).sum::<f64>();
        match family {
            Family::Gqarch => {
                let mut grid: Vec<(f64, f64, f64)> = Vec::new();
                for gamma in [0.2, 0.5, 0.8] {
                    for d in [0.1, 0.3] {
                        grid.push((gamma, d, -0.1));
                    }
                }
                grid.push((0.5, 0.1, 0.1));
                grid.push((0.5, 0.3, 0.1));
                grid.into_iter()
                    .map(|(gamma, d, beta)| {
                        let gap = (1.0 - gamma - b2(beta, d)).max(0.05);
                        let s = (0.5 * v * gap).sqrt();
                        FittedParams::Gqarch {
                            a: s,
                            c: s,
                            beta,
                            d,
                            gamma,
                        }
                    })
                    .collect()
            }
            Family::Qarch => [0.1, 0.2, 0.3, 0.4]
                .iter()
                .flat_map(|&d| [-0.1, 0.1].map(|beta| (d, beta)))
                .map(|(d, beta)| {
                    let s = (0.5 * v * (1.0 - b2(beta, d)).max(0.05)).sqrt();
                    FittedParams::Qarch { a: s, c: s, beta, d }
                })
                .collect(),
            Family::Larch => [0.1, 0.2, 0.3, 0.4]
                .iter()
                .flat_map(|&d| [-0.2, 0.2].map(|beta| (d, beta)))
                .map(|(d, beta)| {
                    let a = (v * (1.0 - b2(beta, d)).max(0.05)).sqrt();
                    FittedParams::Larch { a, beta, d }
                })
                .collect(),
            Family::Garch11 => [
                (0.05, 0.9),
                (0.1, 0.85),
                (0.15, 0.8),
                (0.05, 0.7),
                (0.1, 0.6),
                (0.2, 0.7),
                (0.03, 0.95),
                (0.3, 0.5),
            ]
            .iter()
            .map(|&(alpha, beta)| FittedParams::Garch11 {
                omega: v * (1.0 - alpha - beta),
                alpha,
                beta,
            })
            .collect(),
        }
    }

    fn run_start(&self, start: &FittedParams, opts: &NelderMeadOptions) -> (FittedParams, f64, usize, bool) {
        let family = start.family();
        let f = |u: &[f64]| self.objective(&FittedParams::from_raw(family, u));
        let step = raw_steps(family);
        let first = nelder_mead(f, &start.to_raw(), &step, opts);
        // One restart from the optimum guards against a collapsed simplex.
        let second = nelder_mead(f, &first.x, &step, opts);
        let best = if second.f <= first.f { &second } else { &first };
        (
            FittedParams::from_raw(family, &best.x),
            best.f,
            first.iterations + second.iterations,
            first.converged && second.converged,
        )
    }

    pub fn fit(&self, family: Family, opts: &FitOptions) -> Result<FitResult> {
        let starts = match &opts.starts {
            Some(s) => {
                for p in s {
                    if p.family() != family {
                        return Err(Error::domain("start point family does not match"));
                    }
                    p.check_domain()?;
                }
                s.clone()
            }
            None => self.default_starts(family),
        };
        if starts.is_empty() {
            return Err(Error::domain("no start points"));
        }
        let runs: Vec<_> = if opts.parallel {
            starts.par_iter().map(|s| self.run_start(s, &opts.optimizer)).collect()
        } else {
            starts.iter().map(|s| self.run_start(s, &opts.optimizer)).collect()
        };
        let mut best = 0;
        for (i, r) in runs.iter().enumerate() {
            if r.1 < runs[best].1 {
                best = i;
            }
        }
        let (params, objective, _, converged) = runs[best];
        let (_, floored_points) = self.variance_path(&params);
        Ok(FitResult {
            params,
            objective,
            iterations: runs.iter().map(|r| r.2).sum(),
            converged: converged && objective.is_finite(),
            start_points_tried: runs.len(),
            floored_points,
            window: self.window,
            first_term: self.t0,
        })
    }
}

fn raw_steps(family: Family) -> Vec<f64> {
    match family {
        Family::Larch => vec![0.3, 0.05, 0.5],
        Family::Qarch => vec![0.3, 0.3, 0.05, 0.5],
        Family::Gqarch => vec![0.3, 0.3, 0.05, 0.5, 0.5],
        Family::Garch11 => vec![0.3, 0.5, 0.5],
    }
}

/// Fits `family` to `series` by multi-start simplex search.
pub fn qmle_fit(series: &[f64], family: Family, opts: &FitOptions) -> Result<FitResult> {
    QmleProblem::new(series, opts.window)?.fit(family, opts)
}

/// The QMLE objective of `params` on `series`.
pub fn qmle_objective(series: &[f64], params: &FittedParams, window: Option<usize>) -> Result<f64> {
    params.check_domain()?;
    Ok(QmleProblem::new(series, window)?.objective(params))
}

/// Objective along `grid` values of `param`, other parameters held at `at`.
pub fn profile_objective(
    series: &[f64],
    at: &FittedParams,
    param: &str,
    grid: &[f64],
    window: Option<usize>,
) -> Result<Vec<f64>> {
    let problem = QmleProblem::new(series, window)?;
    grid.iter()
        .map(|&g| Ok(problem.objective(&at.with(param, g)?)))
        .collect()
}

//! Monte Carlo experiments comparing simulated statistics with theory, the
//! theoretical moment report, and kernel density export of `sigma_t`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::TailKind;
use crate::conditions::{check_garch11_fourth, stationarity_condition};
use crate::error::{Error, Result};
use crate::leverage::{solve_leverage, DEFAULT_HORIZON, DEFAULT_MAX_ITER};
use crate::models::{AsymGarch11Spec, GqarchSpec, InnovationSpec, ModelSpec};
use crate::moments::{garch11_moments, gqarch_m2, lm_asymptotics, Garch11Moments, LongMemoryAsymptotics};
use crate::numeric::mean_and_se;
use crate::simulate::{simulate, simulate_gqarch, SimConfig, Trajectory};
use crate::stats::{autocov, block_variance_scaling, decay_exponent, leverage_curve, log_spaced_blocks, AutocovCurve};

pub const THREADS_ENV: &str = "GQARCH_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `E r^2`
    M2,
    /// `E r^4`
    M4,
    /// `cov(r_0^2, r_t^2)` at lags `1..=max_lag`
    Rho,
    /// `cov(sigma_t^2, r_0)` at lags `1..=max_lag`
    Leverage,
    /// Log-log slope of the autocovariance of `r^2`
    Decay,
    /// Growth exponent of partial-sum variances of `r^2`
    Scaling,
}

fn default_replicates() -> usize {
    1
}
fn default_max_lag() -> usize {
    5
}
fn default_lag_range() -> (usize, usize) {
    (10, 300)
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSection {
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    /// Lag window of the decay regression.
    #[serde(default = "default_lag_range")]
    pub lag_range: (usize, usize),
    /// Block sizes of the scaling regression; ten log-spaced sizes from 64
    /// to `n/20` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_sizes: Option<Vec<usize>>,
    #[serde(default = "default_true")]
    pub write_series: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            replicates: default_replicates(),
            targets: Vec::new(),
            output_dir: None,
            max_lag: default_max_lag(),
            lag_range: default_lag_range(),
            block_sizes: None,
            write_series: true,
        }
    }
}

/// Configuration document with `model`, `innovation`, `simulation` and
/// `experiment` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub innovation: InnovationSpec,
    pub simulation: SimConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.model.validate()?;
        cfg.innovation.validate()?;
        cfg.simulation.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate_experiment(&self) -> Result<()> {
        let e = &self.experiment;
        if e.replicates < 1 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if e.targets.is_empty() {
            return Err(Error::Config("no targets requested".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag: Option<usize>,
    pub theory: Option<f64>,
    pub estimate: Option<f64>,
    pub mc_se: Option<f64>,
    pub z_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TargetRecord {
    fn new(target: Target, lag: Option<usize>, theory: Option<f64>, estimate: f64, mc_se: f64) -> Self {
        let z_score = match theory {
            Some(t) if mc_se > 0.0 => Some((estimate - t) / mc_se),
            _ => None,
        };
        Self {
            target,
            lag,
            theory,
            estimate: Some(estimate),
            mc_se: Some(mc_se),
            z_score,
            error: None,
        }
    }

    fn failed(target: Target, err: impl ToString) -> Self {
        Self {
            target,
            lag: None,
            theory: None,
            estimate: None,
            mc_se: None,
            z_score: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub family: String,
    pub fingerprint: String,
    pub seed: u64,
    pub replicates: usize,
    pub n: usize,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub records: Vec<TargetRecord>,
    /// Replicate average of the autocovariance of `r^2` (decay target).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_autocov_sq: Option<AutocovCurve>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    pub fn find(&self, target: Target, lag: Option<usize>) -> Option<&TargetRecord> {
        self.records.iter().find(|r| r.target == target && r.lag == lag)
    }
}

/// Asymmetric GARCH(1,1) form of a model, when it has one: the model itself,
/// a classical GARCH(1,1) (`a = 0`, `b = sqrt(alpha)`), or a quadratic model
/// whose only nonzero coefficient is `b_1`.
pub fn garch_view(spec: &ModelSpec) -> Option<AsymGarch11Spec> {
    match spec {
        ModelSpec::AsymGarch11(s) => Some(*s),
        ModelSpec::Garch11(g) => Some(AsymGarch11Spec {
            a: 0.0,
            b: g.alpha.sqrt(),
            c: g.omega.sqrt(),
            gamma: g.beta_g,
        }),
        ModelSpec::Qarch(s) | ModelSpec::Gqarch(s) => {
            let v = s.coeffs.values();
            let single = s.coeffs.tail_kind() == TailKind::Finite && v.iter().skip(1).all(|x| *x == 0.0);
            single.then(|| AsymGarch11Spec {
                a: s.a,
                b: v.first().copied().unwrap_or(0.0),
                c: s.c,
                gamma: s.gamma,
            })
        }
        ModelSpec::Larch(_) => None,
    }
}

/// Leverage-solver view; classical GARCH(1,1) maps to `a = 0`.
fn leverage_view(spec: &ModelSpec) -> Option<GqarchSpec> {
    match spec {
        ModelSpec::Garch11(_) => garch_view(spec).map(|g| crate::models::embed_asym_in_gqarch(&g)),
        _ => spec.as_gqarch(),
    }
}

/// `h_t` for `t = 1..=horizon`. Models with an asymmetric GARCH(1,1) form use
/// `h_t = 2ab m2 (gamma + b^2)^{t-1}`, which needs only a finite variance;
/// the others go through the leverage equation.
pub fn leverage_theory(spec: &ModelSpec, innov: &InnovationSpec, horizon: usize) -> Result<Vec<f64>> {
    if !innov.is_symmetric_third() {
        return Err(Error::domain("leverage theory needs mu_3 = 0"));
    }
    if let Some(g) = garch_view(spec) {
        let m2 = theoretical_m2(spec)?;
        let rate = g.gamma + g.b * g.b;
        return Ok((0..horizon)
            .map(|i| 2.0 * g.a * g.b * m2 * rate.powi(i as i32))
            .collect());
    }
    let g =
        leverage_view(spec).ok_or_else(|| Error::domain(format!("no leverage theory for {}", spec.family_name())))?;
    Ok(solve_leverage(&g, DEFAULT_HORIZON.max(horizon), None, DEFAULT_MAX_ITER)?.h[..horizon].to_vec())
}

fn garch_theory(spec: &ModelSpec, innov: &InnovationSpec) -> Result<Garch11Moments> {
    let g = garch_view(spec).ok_or_else(|| Error::domain(format!("no closed form for {}", spec.family_name())))?;
    garch11_moments(&g, innov)
}

/// `E r^2` for every family with a finite second moment.
pub fn theoretical_m2(spec: &ModelSpec) -> Result<f64> {
    stationarity_condition(spec).require()?;
    match spec {
        ModelSpec::Larch(s) => Ok(s.a * s.a / (1.0 - s.coeffs.b2())),
        ModelSpec::Garch11(g) => Ok(g.unconditional_variance()),
        ModelSpec::AsymGarch11(g) => Ok((g.a * g.a + g.c * g.c) / (1.0 - g.gamma - g.b * g.b)),
        ModelSpec::Qarch(s) | ModelSpec::Gqarch(s) => gqarch_m2(s),
    }
}

fn long_memory_view(spec: &ModelSpec) -> Result<LongMemoryAsymptotics> {
    match spec {
        ModelSpec::Qarch(s) | ModelSpec::Gqarch(s) => lm_asymptotics(s),
        _ => Err(Error::domain(format!(
            "long-memory asymptotics need a quadratic model with power-law coefficients, got {}",
            spec.family_name()
        ))),
    }
}

#[derive(Debug, Clone, Default)]
struct ReplicateStats {
    m2: f64,
    m4: f64,
    rho: Vec<f64>,
    lev: Vec<f64>,
    acov: Vec<f64>,
    scaling: Option<std::result::Result<f64, String>>,
}

fn replicate_stats(traj: &Trajectory, cfg: &ExperimentConfig) -> Result<ReplicateStats> {
    let e = &cfg.experiment;
    let n = traj.len();
    let r2 = traj.r_squared();
    let mut s = ReplicateStats {
        m2: r2.iter().sum::<f64>() / n as f64,
        m4: r2.iter().map(|v| v * v).sum::<f64>() / n as f64,
        ..Default::default()
    };
    let want = |t: Target| e.targets.contains(&t);
    let mut lag_needed = 0;
    if want(Target::Rho) {
        lag_needed = e.max_lag;
    }
    if want(Target::Decay) {
        lag_needed = lag_needed.max(e.lag_range.1);
    }
    if lag_needed > 0 {
        let c = autocov(&r2, lag_needed)?;
        if want(Target::Rho) {
            s.rho = c.values[1..=e.max_lag].to_vec();
        }
        if want(Target::Decay) {
            s.acov = c.values;
        }
    }
    if want(Target::Leverage) {
        s.lev = leverage_curve(&traj.r, e.max_lag)?.values;
    }
    if want(Target::Scaling) {
        let blocks = e
            .block_sizes
            .clone()
            .unwrap_or_else(|| log_spaced_blocks(64, n / 20, 10));
        s.scaling = Some(
            block_variance_scaling(&r2, &blocks)
                .map(|x| x.0)
                .map_err(|e| e.to_string()),
        );
    }
    Ok(s)
}

/// Thread count from `GQARCH_THREADS`: `Some(0)` means serial, `None` means
/// the rayon default.
pub fn thread_setting() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

/// Evaluates `f(k)` for `k = 0..count`, returning results in index order
/// regardless of the thread count.
pub fn map_replicates<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    match thread_setting() {
        Some(0) => (0..count as u64).map(&f).collect(),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(|| (0..count as u64).into_par_iter().map(&f).collect())
        }
        None => (0..count as u64).into_par_iter().map(&f).collect(),
    }
}

fn write_series(dir: &Path, k: u64, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("series_{k}.csv")))?;
    w.write_record(["t", "r", "sigma_sq"])?;
    for (t, (r, v)) in traj.r.iter().zip(&traj.sigma_sq).enumerate() {
        w.write_record([t.to_string(), r.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every replicate on its own RNG stream and compares the replicate
/// means of each target statistic with theory.
///
/// Fails only when the model has no finite variance; a target whose own
/// precondition fails is reported with an error and the rest still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    cfg.model.validate()?;
    cfg.validate_experiment()?;
    stationarity_condition(&cfg.model).require()?;
    let e = &cfg.experiment;
    let out_dir = e.output_dir.as_deref();
    if let Some(d) = out_dir {
        fs::create_dir_all(d)?;
    }

    let stats = map_replicates(e.replicates, |k| {
        let sim = cfg.simulation.with_replicate(k);
        let traj = simulate(&cfg.model, &cfg.innovation, &sim)?;
        if let (Some(d), true) = (out_dir, e.write_series) {
            write_series(d, k, &traj)?;
        }
        replicate_stats(&traj, cfg)
    })?;

    let mut records = Vec::new();
    let mut mean_curve = None;
    let column = |f: &dyn Fn(&ReplicateStats) -> f64| -> Vec<f64> { stats.iter().map(f).collect() };
    let mut targets = e.targets.clone();
    targets.dedup();
    for &target in &targets {
        match target {
            Target::M2 => {
                let (m, se) = mean_and_se(&column(&|s| s.m2));
                let theory = theoretical_m2(&cfg.model).ok();
                records.push(TargetRecord::new(target, None, theory, m, se));
            }
            Target::M4 => {
                let (m, se) = mean_and_se(&column(&|s| s.m4));
                match garch_theory(&cfg.model, &cfg.innovation) {
                    Ok(th) => records.push(TargetRecord::new(target, None, Some(th.m4_0), m, se)),
                    Err(err) => {
                        let mut rec = TargetRecord::new(target, None, None, m, se);
                        rec.error = Some(err.to_string());
                        records.push(rec);
                    }
                }
            }
            Target::Rho => {
                let theory = garch_theory(&cfg.model, &cfg.innovation);
                for lag in 1..=e.max_lag {
                    let (m, se) = mean_and_se(&column(&|s| s.rho[lag - 1]));
                    let th = theory.as_ref().ok().map(|t| t.rho(lag));
                    let mut rec = TargetRecord::new(target, Some(lag), th, m, se);
                    if let Err(err) = &theory {
                        rec.error = Some(err.to_string());
                    }
                    records.push(rec);
                }
            }
            Target::Leverage => {
                let theory = leverage_theory(&cfg.model, &cfg.innovation, e.max_lag);
                for lag in 1..=e.max_lag {
                    let (m, se) = mean_and_se(&column(&|s| s.lev[lag - 1]));
                    let th = theory.as_ref().ok().map(|h| h[lag - 1]);
                    let mut rec = TargetRecord::new(target, Some(lag), th, m, se);
                    if let Err(err) = &theory {
                        rec.error = Some(err.to_string());
                    }
                    records.push(rec);
                }
            }
            Target::Decay => match decay_record(&stats, cfg) {
                Ok((rec, curve)) => {
                    records.push(rec);
                    mean_curve = Some(curve);
                }
                Err(err) => records.push(TargetRecord::failed(target, err)),
            },
            Target::Scaling => {
                let vals: std::result::Result<Vec<f64>, String> = stats
                    .iter()
                    .map(|s| s.scaling.clone().unwrap_or_else(|| Err("not computed".into())))
                    .collect();
                match vals {
                    Ok(v) => {
                        let (m, se) = mean_and_se(&v);
                        let theory = long_memory_view(&cfg.model).ok().map(|lm| 2.0 * lm.hurst);
                        records.push(TargetRecord::new(target, None, theory, m, se));
                    }
                    Err(err) => records.push(TargetRecord::failed(target, err)),
                }
            }
        }
    }

    let report = ExperimentReport {
        records,
        mean_autocov_sq: mean_curve,
        metadata: ReportMetadata {
            family: cfg.model.family_name().to_string(),
            fingerprint: cfg.model.fingerprint(),
            seed: cfg.simulation.seed,
            replicates: e.replicates,
            n: cfg.simulation.n,
            runtime_secs: start.elapsed().as_secs_f64(),
        },
    };
    if let Some(d) = out_dir {
        fs::write(d.join("report.json"), serde_json::to_string_pretty(&report)?)?;
        if let Some(c) = &report.mean_autocov_sq {
            c.write_csv(fs::File::create(d.join("autocov_sq.csv"))?)?;
        }
    }
    Ok(report)
}

/// Slope of the replicate-averaged curve, with a leave-one-out jackknife
/// standard error.
fn decay_record(stats: &[ReplicateStats], cfg: &ExperimentConfig) -> Result<(TargetRecord, AutocovCurve)> {
    let (lo, hi) = cfg.experiment.lag_range;
    let r = stats.len();
    let len = stats[0].acov.len();
    let mut total = vec![0.0; len];
    for s in stats {
        for (t, v) in total.iter_mut().zip(&s.acov) {
            *t += v;
        }
    }
    let curve_of = |values: Vec<f64>| AutocovCurve {
        lags: (0..len).collect(),
        se_bands: vec![f64::NAN; len],
        values,
        n_used: cfg.simulation.n,
    };
    let mean = curve_of(total.iter().map(|v| v / r as f64).collect());
    let (slope, ols_se) = decay_exponent(&mean, lo, hi)?;
    let se = if r > 1 {
        let loo: Vec<f64> = stats
            .iter()
            .map(|s| {
                let vals = total
                    .iter()
                    .zip(&s.acov)
                    .map(|(t, v)| (t - v) / (r - 1) as f64)
                    .collect();
                decay_exponent(&curve_of(vals), lo, hi).map(|x| x.0)
            })
            .collect::<Result<_>>()?;
        let m = loo.iter().sum::<f64>() / r as f64;
        ((r - 1) as f64 / r as f64 * loo.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt()
    } else {
        ols_se
    };
    let theory = long_memory_view(&cfg.model).ok().map(|lm| lm.decay_exponent);
    let mut mean = mean;
    mean.se_bands = vec![0.0; len];
    Ok((TargetRecord::new(Target::Decay, None, theory, slope, se), mean))
}

/// Closed-form quantities available for a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub family: String,
    pub fingerprint: String,
    pub m2: Option<f64>,
    pub m4: Option<f64>,
    /// `(t, E r_t^2 r_0)`
    pub m3: Vec<(usize, f64)>,
    /// `(t, cov(r_0^2, r_t^2))`
    pub rho: Vec<(usize, f64)>,
    pub long_memory: Option<LongMemoryAsymptotics>,
    /// `(t, h_t)` from the leverage equation.
    pub leverage: Vec<(usize, f64)>,
    pub notes: Vec<String>,
}

pub fn moment_report(spec: &ModelSpec, innov: &InnovationSpec, max_lag: usize) -> MomentReport {
    let mut notes = Vec::new();
    let mut note = |what: &str, e: Error| notes.push(format!("{what}: {e}"));
    let m2 = theoretical_m2(spec).map_err(|e| note("m2", e)).ok();
    let garch = garch_theory(spec, innov)
        .map_err(|e| note("garch closed forms", e))
        .ok();
    let long_memory = long_memory_view(spec).map_err(|e| note("long memory", e)).ok();
    let leverage = match leverage_theory(spec, innov, max_lag) {
        Ok(h) => h.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect(),
        Err(e) => {
            note("leverage", e);
            Vec::new()
        }
    };
    MomentReport {
        family: spec.family_name().to_string(),
        fingerprint: spec.fingerprint(),
        m2,
        m4: garch.map(|g| g.m4_0),
        m3: garch
            .map(|g| (1..=max_lag).map(|t| (t, g.m3(t))).collect())
            .unwrap_or_default(),
        rho: garch
            .map(|g| (1..=max_lag).map(|t| (t, g.rho(t))).collect())
            .unwrap_or_default(),
        long_memory,
        leverage,
        notes,
    }
}

/// Smoothed marginal density of `sigma_t` for one value of `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub gamma: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub mean: f64,
    /// Moment skewness; dominated by the right tail.
    pub skewness: f64,
    /// Pearson's median skewness `3 (mean - median) / sd`; robust to the tail.
    pub median_skewness: f64,
    /// Fraction of `sigma_t` above twice the `gamma = 0` floor `c`.
    pub mass_above_2c: f64,
    pub bandwidth: f64,
}

fn skewness(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let s3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    (m, v, if v > 0.0 { s3 / v.powf(1.5) } else { 0.0 })
}

fn median_skewness(x: &[f64], mean: f64, var: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    if var > 0.0 {
        3.0 * (mean - median) / var.sqrt()
    } else {
        0.0
    }
}

fn silverman(x: &[f64], var: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| s[((s.len() - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = match (var.sqrt(), iqr / 1.34) {
        (a, b) if b > 0.0 => a.min(b),
        (a, _) => a,
    };
    0.9 * spread.max(1e-300) * (x.len() as f64).powf(-0.2)
}

/// Gaussian kernel density of `sigma_t` under `base` with `gamma` replaced by
/// each grid value, evaluated on a common grid of `points` values. Files
/// `density_gamma_<gamma>.csv` are written to `out_dir` when given.
pub fn histogram_export(
    base: &GqarchSpec,
    gammas: &[f64],
    innov: &InnovationSpec,
    sim: &SimConfig,
    points: usize,
    out_dir: Option<&Path>,
) -> Result<Vec<DensityCurve>> {
    if gammas.is_empty() {
        return Err(Error::domain("empty gamma grid"));
    }
    if points < 2 {
        return Err(Error::domain("density grid needs at least two points"));
    }
    let mut samples = Vec::with_capacity(gammas.len());
    for &g in gammas {
        if !(0.0..1.0).contains(&g) {
            return Err(Error::domain(format!("gamma {g} outside [0, 1)")));
        }
        let mut spec = base.clone();
        spec.gamma = g;
        let traj = simulate_gqarch(&spec, innov, sim)?;
        if traj.is_empty() {
            return Err(Error::domain("empty trajectory"));
        }
        samples.push(traj.sigma());
    }
    let moments: Vec<(f64, f64, f64)> = samples.iter().map(|x| skewness(x)).collect();
    let bandwidths: Vec<f64> = samples.iter().zip(&moments).map(|(x, m)| silverman(x, m.1)).collect();
    let pad = 3.0 * bandwidths.iter().copied().fold(0.0, f64::max);
    let lo = samples.iter().flatten().copied().fold(f64::INFINITY, f64::min) - pad;
    let hi = samples.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max) + pad;
    let grid: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();

    let mut out = Vec::with_capacity(gammas.len());
    for (i, (&gamma, x)) in gammas.iter().zip(&samples).enumerate() {
        let (mean, _, skew) = moments[i];
        let h = bandwidths[i];
        let scale = norm / (x.len() as f64 * h);
        let density: Vec<f64> = grid
            .iter()
            .map(|&g| x.iter().map(|&v| (-0.5 * ((g - v) / h).powi(2)).exp()).sum::<f64>() * scale)
            .collect();
        let curve = DensityCurve {
            gamma,
            mass_above_2c: x.iter().filter(|&&v| v > 2.0 * base.c).count() as f64 / x.len() as f64,
            grid: grid.clone(),
            density,
            mean,
            skewness: skew,
            median_skewness: median_skewness(x, mean, moments[i].1),
            bandwidth: h,
        };
        if let Some(d) = out_dir {
            fs::create_dir_all(d)?;
            let mut w = csv::Writer::from_path(d.join(format!("density_gamma_{gamma}.csv")))?;
            w.write_record(["sigma", "density"])?;
            for (s, p) in curve.grid.iter().zip(&curve.density) {
                w.write_record([s.to_string(), p.to_string()])?;
            }
            w.flush()?;
        }
        out.push(curve);
    }
    Ok(out)
}

/// Fourth-moment check used by callers that want `E r^4` to exist before
/// requesting `M4` or `Rho`.
pub fn fourth_moment_ready(spec: &ModelSpec, innov: &InnovationSpec) -> bool {
    garch_view(spec).is_some_and(|g| check_garch11_fourth(&g, innov.mu(4)).satisfied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSeq;
    use crate::models::{fixtures, Garch11Spec};

    fn asym_config(n: usize, reps: usize, targets: Vec<Target>) -> ExperimentConfig {
        ExperimentConfig {
            model: ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.5, 0.2, 0.3).unwrap()),
            innovation: InnovationSpec::standard_normal(),
            simulation: SimConfig::new(n, 11).with_burn_in(500),
            experiment: ExperimentSection {
                replicates: reps,
                targets,
                ..Default::default()
            },
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = asym_config(1000, 2, vec![Target::M2, Target::Rho]);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let minimal = r#"{"model":{"family":"garch11","omega":1e-5,"alpha":0.13,"beta_g":0.83},
                          "simulation":{"n":100,"seed":1}}"#;
        let c = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(c.experiment.replicates, 1);
        assert!(c.validate_experiment().is_err());
    }

    #[test]
    fn empty_targets_rejected() {
        assert!(matches!(
            run_experiment(&asym_config(100, 1, vec![])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn nonstationary_model_fails_with_condition() {
        let mut cfg = asym_config(100, 1, vec![Target::M2]);
        cfg.model = ModelSpec::Garch11(Garch11Spec::new(1e-5, 0.3, 0.75).unwrap());
        assert!(matches!(run_experiment(&cfg), Err(Error::Condition { .. })));
    }

    #[test]
    fn report_is_deterministic_and_thread_independent() {
        let cfg = asym_config(2000, 4, vec![Target::M2, Target::Rho, Target::Leverage, Target::M4]);
        let mut a = run_experiment(&cfg).unwrap();
        let mut b = run_experiment(&cfg).unwrap();
        a.metadata.runtime_secs = 0.0;
        b.metadata.runtime_secs = 0.0;
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.records.len(), 1 + 5 + 5 + 1);
        let rho1 = a.find(Target::Rho, Some(1)).unwrap();
        assert!((rho1.theory.unwrap() - 0.011041).abs() < 1e-6);
    }

    #[test]
    fn target_preconditions_reported_per_target() {
        let spec = fixtures::gqarch_q2(2000);
        let cfg = ExperimentConfig {
            model: ModelSpec::Gqarch(spec),
            innovation: InnovationSpec::standard_normal(),
            simulation: SimConfig::new(3000, 1).with_trunc(2000),
            experiment: ExperimentSection {
                replicates: 2,
                targets: vec![Target::M2, Target::M4, Target::Leverage],
                max_lag: 2,
                ..Default::default()
            },
        };
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.find(Target::M2, None).unwrap().theory.is_some());
        assert!(rep.find(Target::M4, None).unwrap().error.is_some());
        assert!(rep.find(Target::Leverage, Some(1)).unwrap().error.is_some());
    }

    #[test]
    fn garch_views() {
        let g = ModelSpec::Garch11(Garch11Spec::new(0.04, 0.09, 0.6).unwrap());
        let v = garch_view(&g).unwrap();
        assert!((v.b * v.b - 0.09).abs() < 1e-15 && (v.c * v.c - 0.04).abs() < 1e-15);
        let single = GqarchSpec::new(0.1, 0.2, CoefficientSeq::finite(vec![0.5, 0.0]).unwrap(), 0.3).unwrap();
        assert!(garch_view(&ModelSpec::Gqarch(single)).is_some());
        assert!(garch_view(&ModelSpec::Gqarch(fixtures::gqarch_q2(10))).is_none());
        assert!(fourth_moment_ready(&g, &InnovationSpec::standard_normal()));
    }

    #[test]
    fn moment_report_contents() {
        let spec = ModelSpec::AsymGarch11(AsymGarch11Spec::new(0.1, 0.25, 0.2, 0.1).unwrap());
        let rep = moment_report(&spec, &InnovationSpec::standard_normal(), 3);
        assert_eq!(rep.rho.len(), 3);
        assert_eq!(rep.leverage.len(), 3);
        assert!((rep.leverage[0].1 - rep.m3[0].1).abs() < 1e-12);
        assert!(rep.long_memory.is_none() && !rep.notes.is_empty());
    }

    #[test]
    fn densities_integrate_to_one() {
        let spec = fixtures::gqarch_q2(1000);
        let sim = SimConfig::new(3000, 5).with_trunc(1000);
        let curves = histogram_export(&spec, &[0.0, 0.5], &InnovationSpec::standard_normal(), &sim, 200, None).unwrap();
        for c in &curves {
            let dx = c.grid[1] - c.grid[0];
            let mass: f64 = c.density.iter().sum::<f64>() * dx;
            assert!((mass - 1.0).abs() < 0.01, "{mass}");
        }
        assert!(histogram_export(&spec, &[], &InnovationSpec::standard_normal(), &sim, 200, None).is_err());
        assert!(histogram_export(&spec, &[1.0], &InnovationSpec::standard_normal(), &sim, 200, None).is_err());
    }

    #[test]
    fn persistence_moves_mass_off_the_floor() {
        let spec = fixtures::gqarch_q2(10_000);
        let sim = SimConfig::new(100_000, 3);
        let c = histogram_export(
            &spec,
            &[0.0, 0.7735],
            &InnovationSpec::standard_normal(),
            &sim,
            64,
            None,
        )
        .unwrap();
        assert!(c[1].mass_above_2c > c[0].mass_above_2c);
        assert!(c[1].mean > c[0].mean);
        assert!(
            c[1].median_skewness < c[0].median_skewness,
            "{} {}",
            c[0].median_skewness,
            c[1].median_skewness
        );
    }
}

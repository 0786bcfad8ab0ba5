//! Trajectory generation for every model family.
//!
//! Protocol shared by all recursions:
//! - pre-sample returns are zero;
//! - GQARCH starts from the variance floor `c^2 / (1 - gamma)`, GARCH(1,1)
//!   from `omega / (1 - alpha - beta)` (or `omega` when that is not finite);
//! - the moving-average sum uses the most recent `trunc` returns;
//! - the first `burn_in` steps are simulated and discarded.
//!
//! Innovations come from [`replicate_rng`]: ChaCha20 seeded with the master
//! seed via `seed_from_u64`, with the replicate index as the ChaCha stream
//! id. Standard normal draws use the ziggurat sampler of `rand_distr`
//! (`StandardNormal`); Rademacher draws use one `bool` per step. This
//! seed-to-trajectory map is stable across releases of this crate.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientSeq, TailKind, DEFAULT_SIM_TRUNC};
use crate::conditions::{check_classical_garch, check_l2_quadratic, check_larch_variance};
use crate::error::{Error, Result};
use crate::models::{
    embed_asym_in_gqarch, AsymGarch11Spec, Garch11Spec, GqarchSpec, InnovationKind, InnovationSpec, LarchSpec,
    ModelSpec,
};

/// Variance level above which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of retained observations.
    pub n: usize,
    /// Discarded warm-up steps; defaults to `trunc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    pub seed: u64,
    /// Length of the return history entering `sum_j b_j r_{t-j}`.
    #[serde(default = "default_trunc")]
    pub trunc: usize,
    /// Replicate index, used as the RNG stream id.
    #[serde(default)]
    pub replicate: u64,
}

fn default_trunc() -> usize {
    DEFAULT_SIM_TRUNC
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            burn_in: None,
            seed,
            trunc: DEFAULT_SIM_TRUNC,
            replicate: 0,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = Some(burn_in);
        self
    }

    pub fn with_trunc(mut self, trunc: usize) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn with_replicate(mut self, k: u64) -> Self {
        self.replicate = k;
        self
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.trunc)
    }

    pub fn total_steps(&self) -> usize {
        self.burn_in() + self.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.trunc < 1 {
            return Err(Error::Config("simulation needs n >= 1 and trunc >= 1".into()));
        }
        Ok(())
    }
}

/// Simulated returns and conditional variances with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    /// Signed volatility, kept for LARCH where it can be negative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    pub spec_fingerprint: String,
    pub config: SimConfig,
    /// Bound on the standard-deviation share of `X_t` lost to truncation,
    /// `(sum_{j > trunc} b_j^2)^{1/2}`.
    pub trunc_tail_bound: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_squared(&self) -> Vec<f64> {
        self.r.iter().map(|x| x * x).collect()
    }

    /// `sigma_t = sqrt(sigma_t^2)` (or the signed LARCH volatility).
    pub fn sigma(&self) -> Vec<f64> {
        match &self.sigma {
            Some(s) => s.clone(),
            None => self.sigma_sq.iter().map(|v| v.sqrt()).collect(),
        }
    }
}

/// Independent RNG stream for replicate `k` of master seed `seed`.
pub fn replicate_rng(seed: u64, k: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Draw `len` innovations from `innov`.
pub fn draw_innovations<R: Rng>(innov: &InnovationSpec, rng: &mut R, len: usize) -> Result<Vec<f64>> {
    match innov.kind {
        InnovationKind::StandardNormal => Ok((0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()),
        InnovationKind::Rademacher => Ok((0..len)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect()),
        InnovationKind::CustomTable => Err(Error::domain(
            "custom moment tables cannot be sampled; pass innovations explicitly",
        )),
    }
}

fn innovations_for(innov: &InnovationSpec, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut rng = replicate_rng(cfg.seed, cfg.replicate);
    draw_innovations(innov, &mut rng, cfg.total_steps())
}

fn check_innovation_len(zeta: &[f64], cfg: &SimConfig) -> Result<()> {
    cfg.validate()?;
    if zeta.len() != cfg.total_steps() {
        return Err(Error::domain(format!(
            "expected {} innovations (burn-in + n), got {}",
            cfg.total_steps(),
            zeta.len()
        )));
    }
    Ok(())
}

/// Coefficients entering the simulation window, reversed so that
/// `X_t = dot(rev[K-m..], r[t-m..t])` with `m = min(t, K)`.
fn reversed_window(seq: &CoefficientSeq, trunc: usize) -> Vec<f64> {
    let k = match seq.tail_kind() {
        TailKind::Finite => trunc.min(seq.n_trunc()),
        TailKind::PowerLaw { .. } => trunc,
    };
    (1..=k).rev().map(|j| seq.get(j)).collect()
}

fn window_tail_bound(seq: &CoefficientSeq, trunc: usize) -> f64 {
    match seq.tail_kind() {
        TailKind::Finite => seq.values().iter().skip(trunc).map(|v| v * v).sum::<f64>().sqrt(),
        TailKind::PowerLaw { beta, d } => {
            let k = trunc as f64;
            beta.abs() * (k.powf(2.0 * d - 1.0) / (1.0 - 2.0 * d)).sqrt()
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Windows at least this long switch to block FFT evaluation.
const FFT_MIN_WINDOW: usize = 4096;
const FFT_BLOCK: usize = 1024;

/// Running `X_t = sum_{j=1}^{min(t,K)} b_j r_{t-j}` over a path that grows by
/// one value per step.
///
/// Long windows split the sum at the start of the current block: the part
/// reaching into earlier blocks is evaluated for the whole block by one FFT
/// convolution, the in-block part directly.
struct MovingSum {
    rev: Vec<f64>,
    fft: Option<BlockFft>,
}

struct BlockFft {
    /// `b_0 = 0, b_1, ..., b_{K+L-1}`, zero past `K`.
    b: Vec<f64>,
    kernel: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    far: Vec<f64>,
    k: usize,
}

impl BlockFft {
    fn new(b_window: &[f64]) -> Self {
        let k = b_window.len();
        let len = (2 * k + FFT_BLOCK).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut b = vec![0.0; k + FFT_BLOCK];
        b[1..=k].copy_from_slice(b_window);
        let mut kernel: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
        kernel.resize(len, Complex::new(0.0, 0.0));
        forward.process(&mut kernel);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            b,
            kernel,
            forward,
            inverse,
            buf: vec![Complex::new(0.0, 0.0); len],
            scratch: vec![Complex::new(0.0, 0.0); scratch_len],
            far: vec![0.0; FFT_BLOCK],
            k,
        }
    }

    /// Contributions of `r_u`, `u < s`, to `X_t` for `t` in `[s, s + L)`.
    fn refresh(&mut self, history: &[f64]) {
        let s = history.len();
        let k = self.k;
        let zero = Complex::new(0.0, 0.0);
        self.buf.fill(zero);
        // x_i = r_{s-K+i}, zero before the start of the path.
        let lead = k.saturating_sub(s);
        for (slot, &v) in self.buf[lead..k].iter_mut().zip(&history[s + lead - k..]) {
            *slot = Complex::new(v, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (x, g) in self.buf.iter_mut().zip(&self.kernel) {
            *x *= g;
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.buf.len() as f64;
        for (f, v) in self.far.iter_mut().zip(&self.buf[k..k + FFT_BLOCK]) {
            *f = v.re * scale;
        }
    }

    fn next(&mut self, history: &[f64]) -> f64 {
        let t = history.len();
        let off = t % FFT_BLOCK;
        if off == 0 {
            self.refresh(history);
        }
        let s = t - off;
        let mut near = 0.0;
        for (u, r) in history[s..].iter().enumerate() {
            near += self.b[t - s - u] * r;
        }
        self.far[off] + near
    }
}

impl MovingSum {
    /// `total` caps the useful window: lags beyond the path length only ever
    /// meet the zero pre-sample.
    fn new(seq: &CoefficientSeq, trunc: usize, total: usize) -> Self {
        let rev = reversed_window(seq, trunc.min(total.max(1)));
        let fft = (rev.len() >= FFT_MIN_WINDOW).then(|| {
            let fwd: Vec<f64> = rev.iter().rev().copied().collect();
            BlockFft::new(&fwd)
        });
        Self { rev, fft }
    }

    /// `X_t` where `r = history[..t]`.
    #[inline]
    fn next(&mut self, history: &[f64]) -> f64 {
        if let Some(f) = self.fft.as_mut() {
            return f.next(history);
        }
        let t = history.len();
        let k = self.rev.len();
        let m = t.min(k);
        dot(&self.rev[k - m..], &history[t - m..])
    }
}

fn guard(step: usize, value: f64) -> Result<()> {
    if value.is_finite() && value <= DIVERGENCE_LIMIT {
        Ok(())
    } else {
        Err(Error::Divergence { step, value })
    }
}

pub fn simulate_gqarch(spec: &GqarchSpec, innov: &InnovationSpec, cfg: &SimConfig) -> Result<Trajectory> {
    let zeta = innovations_for(innov, cfg)?;
    simulate_gqarch_with(spec, &zeta, cfg)
}

/// GQARCH recursion driven by the supplied innovations
/// (`burn_in + n` values).
pub fn simulate_gqarch_with(spec: &GqarchSpec, zeta: &[f64], cfg: &SimConfig) -> Result<Trajectory> {
    spec.validate()?;
    check_innovation_len(zeta, cfg)?;
    let total = zeta.len();
    let mut window = MovingSum::new(&spec.coeffs, cfg.trunc, total);
    let floor = spec.variance_floor();
    let mut r = Vec::with_capacity(total);
    let mut s2 = Vec::with_capacity(total);
    let mut prev = floor;
    for (t, z) in zeta.iter().enumerate() {
        let level = spec.a + window.next(&r);
        // c^2 + q^2 + gamma v written around the fixed point, so rounding
        // cannot push v below the floor.
        let v = floor + level * level + spec.gamma * (prev - floor);
        guard(t, v)?;
        r.push(z * v.sqrt());
        s2.push(v);
        prev = v;
    }
    let mut warnings = Vec::new();
    let cond = check_l2_quadratic(spec);
    if !cond.satisfied {
        warnings.push(format!("condition {} violated (lhs {})", cond.name, cond.lhs));
    }
    let burn = cfg.burn_in();
    Ok(Trajectory {
        r: r.split_off(burn),
        sigma_sq: s2.split_off(burn),
        sigma: None,
        spec_fingerprint: ModelSpec::Gqarch(spec.clone()).fingerprint(),
        config: *cfg,
        trunc_tail_bound: window_tail_bound(&spec.coeffs, cfg.trunc),
        warnings,
    })
}

pub fn simulate_larch(spec: &LarchSpec, innov: &InnovationSpec, cfg: &SimConfig) -> Result<Trajectory> {
    let zeta = innovations_for(innov, cfg)?;
    simulate_larch_with(spec, &zeta, cfg)
}

/// LARCH recursion `sigma_t = a + sum_j b_j r_{t-j}`, `r_t = zeta_t sigma_t`.
pub fn simulate_larch_with(spec: &LarchSpec, zeta: &[f64], cfg: &SimConfig) -> Result<Trajectory> {
    check_innovation_len(zeta, cfg)?;
    let total = zeta.len();
    let mut window = MovingSum::new(&spec.coeffs, cfg.trunc, total);
    let mut r = Vec::with_capacity(total);
    let mut sigma = Vec::with_capacity(total);
    for (t, z) in zeta.iter().enumerate() {
        let s = spec.a + window.next(&r);
        guard(t, s * s)?;
        r.push(z * s);
        sigma.push(s);
    }
    let mut warnings = Vec::new();
    let cond = check_larch_variance(spec);
    if !cond.satisfied {
        warnings.push(format!("condition {} violated (lhs {})", cond.name, cond.lhs));
    }
    let burn = cfg.burn_in();
    let sigma = sigma.split_off(burn);
    Ok(Trajectory {
        r: r.split_off(burn),
        sigma_sq: sigma.iter().map(|s| s * s).collect(),
        sigma: Some(sigma),
        spec_fingerprint: ModelSpec::Larch(spec.clone()).fingerprint(),
        config: *cfg,
        trunc_tail_bound: window_tail_bound(&spec.coeffs, cfg.trunc),
        warnings,
    })
}

pub fn simulate_garch11(spec: &Garch11Spec, innov: &InnovationSpec, cfg: &SimConfig) -> Result<Trajectory> {
    let zeta = innovations_for(innov, cfg)?;
    simulate_garch11_with(spec, &zeta, cfg)
}

pub fn simulate_garch11_with(spec: &Garch11Spec, zeta: &[f64], cfg: &SimConfig) -> Result<Trajectory> {
    spec.validate()?;
    check_innovation_len(zeta, cfg)?;
    let mut prev_v = if spec.is_covariance_stationary() {
        spec.unconditional_variance()
    } else {
        spec.omega
    };
    let mut prev_r = 0.0;
    let mut r = Vec::with_capacity(zeta.len());
    let mut s2 = Vec::with_capacity(zeta.len());
    for (t, z) in zeta.iter().enumerate() {
        let v = spec.omega + spec.alpha * prev_r * prev_r + spec.beta_g * prev_v;
        guard(t, v)?;
        prev_r = z * v.sqrt();
        prev_v = v;
        r.push(prev_r);
        s2.push(v);
    }
    let mut warnings = Vec::new();
    let cond = check_classical_garch(spec);
    if !cond.satisfied {
        warnings.push(format!("condition {} violated (lhs {})", cond.name, cond.lhs));
    }
    let burn = cfg.burn_in();
    Ok(Trajectory {
        r: r.split_off(burn),
        sigma_sq: s2.split_off(burn),
        sigma: None,
        spec_fingerprint: ModelSpec::Garch11(*spec).fingerprint(),
        config: *cfg,
        trunc_tail_bound: 0.0,
        warnings,
    })
}

/// Runs the embedded GQARCH; the output equals `simulate_gqarch` on
/// [`embed_asym_in_gqarch`] apart from the fingerprint.
pub fn simulate_asym_garch11(spec: &AsymGarch11Spec, innov: &InnovationSpec, cfg: &SimConfig) -> Result<Trajectory> {
    let mut traj = simulate_gqarch(&embed_asym_in_gqarch(spec), innov, cfg)?;
    traj.spec_fingerprint = ModelSpec::AsymGarch11(*spec).fingerprint();
    Ok(traj)
}

pub fn simulate(spec: &ModelSpec, innov: &InnovationSpec, cfg: &SimConfig) -> Result<Trajectory> {
    let zeta = innovations_for(innov, cfg)?;
    simulate_with(spec, &zeta, cfg)
}

pub fn simulate_with(spec: &ModelSpec, zeta: &[f64], cfg: &SimConfig) -> Result<Trajectory> {
    let mut traj = match spec {
        ModelSpec::Larch(s) => simulate_larch_with(s, zeta, cfg)?,
        ModelSpec::Qarch(s) | ModelSpec::Gqarch(s) => simulate_gqarch_with(s, zeta, cfg)?,
        ModelSpec::Garch11(s) => simulate_garch11_with(s, zeta, cfg)?,
        ModelSpec::AsymGarch11(s) => simulate_gqarch_with(&embed_asym_in_gqarch(s), zeta, cfg)?,
    };
    traj.spec_fingerprint = spec.fingerprint();
    Ok(traj)
}

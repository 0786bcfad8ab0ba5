//! Sample estimators matched to the theoretical quantities: autocovariance
//! of squares, leverage, decay exponent and partial-sum variance scaling.
//!
//! Standard errors are i.i.d. approximations. Under long memory they are
//! anti-conservative.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ols;
use crate::simulate::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub n_used: usize,
    /// Approximate standard errors.
    pub se_bands: Vec<f64>,
}

impl AutocovCurve {
    pub fn at(&self, lag: usize) -> Option<f64> {
        self.lags.iter().position(|&l| l == lag).map(|i| self.values[i])
    }

    /// Writes `lag,value,se` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lag", "value", "se"])?;
        for ((l, v), s) in self.lags.iter().zip(&self.values).zip(&self.se_bands) {
            wr.write_record([l.to_string(), v.to_string(), s.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn check_lag(n: usize, max_lag: usize) -> Result<()> {
    if n == 0 || max_lag * 10 >= n {
        return Err(Error::Index(format!("max_lag {max_lag} must be below n/10 (n = {n})")));
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Biased (divide-by-n) sample autocovariance of `x` at lags `0..=max_lag`.
pub fn autocov(x: &[f64], max_lag: usize) -> Result<AutocovCurve> {
    let n = x.len();
    check_lag(n, max_lag)?;
    let mu = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let nf = n as f64;
    let mut values = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let s: f64 = c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum();
        values.push(s / nf);
    }
    let m4 = c.iter().map(|v| v.powi(4)).sum::<f64>() / nf;
    let g0 = values[0];
    let se_bands = (0..=max_lag)
        .map(|k| {
            if k == 0 {
                ((m4 - g0 * g0).max(0.0) / nf).sqrt()
            } else {
                g0 / nf.sqrt()
            }
        })
        .collect();
    Ok(AutocovCurve {
        lags: (0..=max_lag).collect(),
        values,
        n_used: n,
        se_bands,
    })
}

/// Autocovariance of `r_t^2`.
pub fn sample_autocov_sq(traj: &Trajectory, max_lag: usize) -> Result<AutocovCurve> {
    autocov(&traj.r_squared(), max_lag)
}

/// `h_t = (1/(n-t)) sum_s r_{s+t}^2 r_s` for `t = 1..=max_lag`.
pub fn leverage_curve(r: &[f64], max_lag: usize) -> Result<AutocovCurve> {
    let n = r.len();
    check_lag(n, max_lag)?;
    let mut values = Vec::with_capacity(max_lag);
    let mut se_bands = Vec::with_capacity(max_lag);
    for t in 1..=max_lag {
        let m = (n - t) as f64;
        let (mut s, mut s2) = (0.0, 0.0);
        for (a, b) in r[..n - t].iter().zip(&r[t..]) {
            let p = b * b * a;
            s += p;
            s2 += p * p;
        }
        let mu = s / m;
        values.push(mu);
        se_bands.push(((s2 / m - mu * mu).max(0.0) / m).sqrt());
    }
    Ok(AutocovCurve {
        lags: (1..=max_lag).collect(),
        values,
        n_used: n,
        se_bands,
    })
}

pub fn sample_leverage(traj: &Trajectory, max_lag: usize) -> Result<AutocovCurve> {
    leverage_curve(&traj.r, max_lag)
}

/// OLS slope of `log value` on `log lag` over `[lag_lo, lag_hi]`, with its
/// standard error.
pub fn decay_exponent(curve: &AutocovCurve, lag_lo: usize, lag_hi: usize) -> Result<(f64, f64)> {
    if lag_lo == 0 || lag_hi <= lag_lo {
        return Err(Error::domain(format!("degenerate lag range [{lag_lo}, {lag_hi}]")));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (&l, &v) in curve.lags.iter().zip(&curve.values) {
        if l < lag_lo || l > lag_hi {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::domain(format!(
                "autocovariance {v} at lag {l} is not positive; log-log slope undefined"
            )));
        }
        x.push((l as f64).ln());
        y.push(v.ln());
    }
    if x.len() < 3 {
        return Err(Error::domain(format!("only {} lags in [{lag_lo}, {lag_hi}]", x.len())));
    }
    let (slope, _, se) = ols(&x, &y);
    Ok((slope, se))
}

/// Variance of non-overlapping block sums of `x - mean(x)` per block size, and
/// the log-log slope of variance on block size.
pub fn block_variance_scaling(x: &[f64], block_sizes: &[usize]) -> Result<(f64, Vec<f64>)> {
    let n = x.len();
    if block_sizes.len() < 2 {
        return Err(Error::domain("need at least two block sizes"));
    }
    let mu = mean(x);
    let mut per_block = Vec::with_capacity(block_sizes.len());
    for &m in block_sizes {
        if m == 0 || m * 20 > n {
            return Err(Error::domain(format!(
                "insufficient blocks: size {m} gives fewer than 20 blocks (n = {n})"
            )));
        }
        let sums: Vec<f64> = x.chunks_exact(m).map(|b| b.iter().map(|v| v - mu).sum()).collect();
        let sm = mean(&sums);
        let var = sums.iter().map(|s| (s - sm).powi(2)).sum::<f64>() / (sums.len() - 1) as f64;
        per_block.push(var);
    }
    if per_block.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateSeries("zero block-sum variance".into()));
    }
    let lx: Vec<f64> = block_sizes.iter().map(|&m| (m as f64).ln()).collect();
    let ly: Vec<f64> = per_block.iter().map(|v| v.ln()).collect();
    Ok((ols(&lx, &ly).0, per_block))
}

/// Scaling of partial sums of `r_t^2`; theory predicts exponent `1 + 2d`.
pub fn partial_sum_variance_scaling(traj: &Trajectory, block_sizes: &[usize]) -> Result<(f64, Vec<f64>)> {
    block_variance_scaling(&traj.r_squared(), block_sizes)
}

/// Geometric grid of block sizes from `lo` to `hi`.
pub fn log_spaced_blocks(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo.max(1) as f64).ln(), (hi.max(lo.max(1)) as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let f = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            (a + f * (b - a)).exp().round() as usize
        })
        .collect();
    out.dedup();
    out
}

//! Command-line front end. Exit status 0 on success, 1 on model, condition
//! or I/O errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::app::{histogram_export, moment_report, run_experiment, ExperimentConfig, ExperimentReport};
use crate::conditions::check_all;
use crate::error::{Error, Result};
use crate::estimate::{qmle_fit, Family, FitOptions};
use crate::leverage::{classify_signs, solve_leverage, DEFAULT_HORIZON, DEFAULT_MAX_ITER};
use crate::simulate::simulate;

/// `println!` that tolerates a closed stdout.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(
    name = "gqarch",
    version,
    about = "Simulate, check and fit GQARCH-type volatility models"
)]
struct Cli {
    /// JSON configuration with `model`, `innovation`, `simulation`, `experiment` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one trajectory and write `series_<k>.csv`.
    Simulate {
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Print the table of stationarity and moment conditions.
    Check,
    /// Print closed-form moments as JSON.
    Moments {
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
    },
    /// Solve for the leverage function; writes `leverage.csv`.
    Leverage {
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        /// Order used for the sign classification.
        #[arg(long, default_value_t = 20)]
        order: usize,
    },
    /// Fit a model by QMLE to a CSV column of returns (`r` or `t,r`).
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "gqarch")]
        family: String,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Run the Monte Carlo experiment described by the config.
    Mc,
    /// Kernel densities of sigma_t over a gamma grid.
    Hist {
        /// Comma-separated gamma values.
        #[arg(long, value_delimiter = ',', default_value = "0,0.7735")]
        gammas: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        points: usize,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            eprintln!("usage: gqarch [--config <file>] [--seed <u64>] [--out <dir>] <simulate|check|moments|leverage|estimate|mc|hist>");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(cli: &Cli) -> std::result::Result<ExperimentConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Usage("this subcommand needs --config <file>".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.experiment.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Simulate { replicate } => {
            let cfg = load_config(cli)?;
            let sim = cfg.simulation.with_replicate(*replicate);
            let traj = simulate(&cfg.model, &cfg.innovation, &sim)?;
            let dir = out_dir(cli)?;
            let path = dir.join(format!("series_{replicate}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(Error::from)?;
            w.write_record(["t", "r", "sigma_sq"]).map_err(Error::from)?;
            for (t, (r, v)) in traj.r.iter().zip(&traj.sigma_sq).enumerate() {
                w.write_record([t.to_string(), r.to_string(), v.to_string()])
                    .map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            print_json(&serde_json::json!({
                "path": path,
                "n": traj.len(),
                "fingerprint": traj.spec_fingerprint,
                "mean_r2": traj.r_squared().iter().sum::<f64>() / traj.len() as f64,
                "trunc_tail_bound": traj.trunc_tail_bound,
                "warnings": traj.warnings,
            }))?;
        }
        Command::Check => {
            let cfg = load_config(cli)?;
            let reports = check_all(&cfg.model, &cfg.innovation)?;
            out!("{:<44} {:>14} {:>14} {:>5}", "condition", "lhs", "rhs", "ok");
            for r in &reports {
                out!(
                    "{:<44} {:>14.6e} {:>14.6e} {:>5}",
                    r.name,
                    r.lhs,
                    r.rhs,
                    if r.satisfied { "yes" } else { "no" }
                );
                if let Some(w) = &r.warning {
                    out!("  note: {w}");
                }
            }
        }
        Command::Moments { max_lag } => {
            let cfg = load_config(cli)?;
            let rep = moment_report(&cfg.model, &cfg.innovation, *max_lag);
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir).map_err(Error::from)?;
                fs::write(
                    dir.join("moments.json"),
                    serde_json::to_string_pretty(&rep).map_err(Error::from)?,
                )
                .map_err(Error::from)?;
            }
            print_json(&rep)?;
        }
        Command::Leverage { horizon, order } => {
            let cfg = load_config(cli)?;
            let spec = cfg.model.as_gqarch().ok_or_else(|| {
                Error::Domain(format!(
                    "leverage needs a quadratic model, got {}",
                    cfg.model.family_name()
                ))
            })?;
            let sol = solve_leverage(&spec, *horizon, None, DEFAULT_MAX_ITER)?;
            let dir = out_dir(cli)?;
            let mut w = csv::Writer::from_path(dir.join("leverage.csv")).map_err(Error::from)?;
            w.write_record(["t", "h_t"]).map_err(Error::from)?;
            for (t, h) in sol.h.iter().enumerate() {
                w.write_record([(t + 1).to_string(), h.to_string()])
                    .map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            print_json(&serde_json::json!({
                "classification": classify_signs(&spec, &cfg.innovation, *order),
                "norm": sol.l2_norm(),
                "norm_bound": sol.norm_bound,
                "norm_bound_holds": sol.l2_norm() <= sol.norm_bound,
                "iterations": sol.iterations,
                "residual": sol.residual,
                "truncation_tail": sol.truncation_tail,
            }))?;
        }
        Command::Estimate { input, family, window } => {
            let family: Family = family.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let series = read_series(input)?;
            let opts = FitOptions {
                window: *window,
                ..Default::default()
            };
            let fit = qmle_fit(&series, family, &opts)?;
            if let Some(dir) = &cli.out {
                fs::create_dir_all(dir).map_err(Error::from)?;
                fs::write(
                    dir.join("fit.json"),
                    serde_json::to_string_pretty(&fit).map_err(Error::from)?,
                )
                .map_err(Error::from)?;
            }
            print_json(&fit)?;
        }
        Command::Mc => {
            let cfg = load_config(cli)?;
            if let Err(e) = cfg.validate_experiment() {
                return Err(Failure::Run(e));
            }
            let report = run_experiment(&cfg)?;
            print_summary(&report);
        }
        Command::Hist { gammas, points } => {
            let cfg = load_config(cli)?;
            let spec = cfg.model.as_gqarch().ok_or_else(|| {
                Error::Domain(format!("hist needs a quadratic model, got {}", cfg.model.family_name()))
            })?;
            let dir = out_dir(cli)?;
            let curves = histogram_export(&spec, gammas, &cfg.innovation, &cfg.simulation, *points, Some(&dir))?;
            let summary: Vec<_> = curves
                .iter()
                .map(|c| serde_json::json!({"gamma": c.gamma, "mean": c.mean, "skewness": c.skewness, "median_skewness": c.median_skewness, "mass_above_2c": c.mass_above_2c}))
                .collect();
            print_json(&summary)?;
        }
    }
    Ok(())
}

fn print_summary(report: &ExperimentReport) {
    out!(
        "{:<10} {:>4} {:>14} {:>14} {:>12} {:>8}",
        "target",
        "lag",
        "theory",
        "estimate",
        "mc_se",
        "z"
    );
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
    for r in &report.records {
        let target = serde_json::to_value(r.target)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        out!(
            "{:<10} {:>4} {:>14} {:>14} {:>12} {:>8}",
            target,
            r.lag.map_or_else(|| "-".to_string(), |l| l.to_string()),
            fmt(r.theory),
            fmt(r.estimate),
            fmt(r.mc_se),
            r.z_score.map_or_else(|| "-".to_string(), |z| format!("{z:.2}")),
        );
        if let Some(e) = &r.error {
            out!("  note: {e}");
        }
    }
}

/// Reads returns from a CSV file: one column, or the second column of
/// `t,r` rows. A non-numeric first row is taken as a header.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.is_empty() || (rec.len() == 1 && rec[0].is_empty()) {
            continue;
        }
        let field = if rec.len() >= 2 { &rec[1] } else { &rec[0] };
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::domain(format!("row {}: cannot parse `{field}`", i + 1))),
        }
    }
    Ok(out)
}

//! Wave-pipeline sweep over a list of speeds.
//!
//! Each entry runs the full construct-iterate-fit pipeline independently;
//! entries are data-parallel. With the `parallel` feature (default) the
//! sweep fans out through rayon, bounded by a job count; a sequential
//! fallback is always compiled and is used when the feature is off.
//! Results are returned in speed order regardless of completion order, so
//! output artifacts are deterministic either way.

use crate::asymptotics::{compare_rates, RateComparison};
use crate::construction::{build_pair, monotone_iterate, IterateOptions};
use crate::kpp::KppOptions;
use crate::numerics::{discrete_residual, Grid, WaveProfile};
use crate::params::{ModelParams, SpeedRegime, SpeedSpec};
use crate::Result;
use serde::{Deserialize, Serialize};

/// One row of a sweep summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub regime: SpeedRegime,
    pub converged: bool,
    pub iterations: usize,
    pub residual_u: f64,
    pub residual_v: f64,
    pub comparisons: Vec<RateComparison>,
    pub rates_pass: bool,
    pub error: Option<String>,
}

/// Full pipeline for one speed. Errors are folded into the row so a sweep
/// can keep going.
pub fn run_speed(p: &ModelParams, c: f64, grid: &Grid, rate_tol: f64) -> SweepRow {
    match wave_at_speed(p, c, grid, rate_tol) {
        Ok(row) => row,
        Err(e) => SweepRow {
            c,
            regime: SpeedSpec::classify(p, c)
                .map(|s| s.regime)
                .unwrap_or(SpeedRegime::Subcritical),
            converged: false,
            iterations: 0,
            residual_u: f64::NAN,
            residual_v: f64::NAN,
            comparisons: Vec::new(),
            rates_pass: false,
            error: Some(e.to_string()),
        },
    }
}

fn wave_at_speed(p: &ModelParams, c: f64, grid: &Grid, rate_tol: f64) -> Result<SweepRow> {
    let spec = SpeedSpec::classify(p, c)?;
    let (pair, _) = build_pair(p, c, grid, None, &KppOptions::default())?;
    let (wave, trace) = monotone_iterate(&pair, p, c, &IterateOptions::default())?;
    let (ru, rv) = discrete_residual(&wave, p, c)?;
    let comparisons = compare_rates(&wave, p, c, rate_tol)?;
    let rates_pass = comparisons.iter().all(|r| r.verdict);
    Ok(SweepRow {
        c,
        regime: spec.regime,
        converged: true,
        iterations: trace.iterations,
        residual_u: ru,
        residual_v: rv,
        comparisons,
        rates_pass,
        error: None,
    })
}

/// Computes the wave alone (no rate fits); shared by callers that need
/// the profile.
pub fn wave_profile(p: &ModelParams, c: f64, grid: &Grid) -> Result<WaveProfile> {
    let (pair, _) = build_pair(p, c, grid, None, &KppOptions::default())?;
    let (wave, _) = monotone_iterate(&pair, p, c, &IterateOptions::default())?;
    Ok(wave)
}

/// Sequential sweep; always available.
pub fn run_sweep_sequential(
    p: &ModelParams,
    speeds: &[f64],
    grid: &Grid,
    rate_tol: f64,
) -> Vec<SweepRow> {
    speeds.iter().map(|&c| run_speed(p, c, grid, rate_tol)).collect()
}

/// Parallel sweep through rayon, bounded by `jobs` worker threads
/// (0 = rayon's default). Rows come back in input order.
#[cfg(feature = "parallel")]
pub fn run_sweep_parallel(
    p: &ModelParams,
    speeds: &[f64],
    grid: &Grid,
    rate_tol: f64,
    jobs: usize,
) -> Vec<SweepRow> {
    use rayon::prelude::*;
    let body = || {
        speeds
            .par_iter()
            .map(|&c| run_speed(p, c, grid, rate_tol))
            .collect()
    };
    if jobs == 0 {
        body()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(body),
            Err(_) => run_sweep_sequential(p, speeds, grid, rate_tol),
        }
    }
}

/// Dispatches to the parallel sweep when compiled in, otherwise to the
/// sequential fallback.
pub fn run_sweep(p: &ModelParams, speeds: &[f64], grid: &Grid, rate_tol: f64, jobs: usize) -> Vec<SweepRow> {
    #[cfg(feature = "parallel")]
    {
        run_sweep_parallel(p, speeds, grid, rate_tol, jobs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        run_sweep_sequential(p, speeds, grid, rate_tol)
    }
}

/// Renders sweep rows as a flat CSV for plotting.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    out.push_str(
        "c,regime,converged,iterations,residual_u,residual_v,\
         rate_u_minus,rate_v_minus,rate_u_plus,rate_v_plus,\
         pred_u_minus,pred_v_minus,pred_u_plus,pred_v_plus,rates_pass,error\n",
    );
    for row in rows {
        let regime = match row.regime {
            SpeedRegime::Supercritical => "supercritical",
            SpeedRegime::Critical => "critical",
            SpeedRegime::Subcritical => "subcritical",
        };
        let mut fitted = [f64::NAN; 4];
        let mut predicted = [f64::NAN; 4];
        for (k, cmp) in row.comparisons.iter().enumerate().take(4) {
            fitted[k] = cmp.fitted;
            predicted[k] = cmp.predicted;
        }
        let _ = writeln!(
            out,
            "{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            row.c,
            regime,
            row.converged,
            row.iterations,
            row.residual_u,
            row.residual_v,
            fitted[0],
            fitted[1],
            fitted[2],
            fitted[3],
            predicted[0],
            predicted[1],
            predicted[2],
            predicted[3],
            row.rates_pass,
            row.error.as_deref().unwrap_or(""),
        );
    }
    out
}

//! Deviation-rate experiment: how fast does the CV estimate approach the
//! true risk of the full-sample rule as the expected tail count
//! `k = alpha·n` grows? The bounds predict `O(1/sqrt(k))`, i.e. a slope of
//! −1/2 on a log-log plot of mean deviation against k.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::trial::{run_trials, TrialResult};
use crate::stats::{fit_line, quantile_nearest_rank, LineFit};

/// Per-grid-point deviation summary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub mean_deviation: f64,
    pub q90_deviation: f64,
}

/// Log-log fit of mean deviation against the tail count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit `log(mean deviation) = slope·log(k) + intercept`.
pub fn fit_rate(ks: &[f64], mean_deviations: &[f64]) -> Result<LineFit> {
    if mean_deviations.iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(Error::invalid(
            "rate fit needs strictly positive mean deviations",
        ));
    }
    let log_k: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let log_d: Vec<f64> = mean_deviations.iter().map(|d| d.ln()).collect();
    fit_line(&log_k, &log_d)
}

/// Aggregate finished trials into a rate report. Requires at least three
/// grid points with at least 50 trials each.
pub fn rate_report_from_trials(trials: &[TrialResult]) -> Result<RateReport> {
    let mut by_n: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for t in trials {
        match by_n.iter_mut().find(|(n, _, _)| *n == t.n) {
            Some((_, _, devs)) => devs.push(t.deviation()),
            None => by_n.push((t.n, t.k, vec![t.deviation()])),
        }
    }
    by_n.sort_by_key(|(n, _, _)| *n);
    if by_n.len() < 3 {
        return Err(Error::invalid(
            "rate report needs at least 3 sample sizes in the grid",
        ));
    }
    if by_n.iter().any(|(_, _, d)| d.len() < 50) {
        return Err(Error::invalid("rate report needs at least 50 trials per n"));
    }
    let points: Vec<RatePoint> = by_n
        .iter()
        .map(|(n, k, devs)| {
            let mean = devs.iter().sum::<f64>() / devs.len() as f64;
            let mut sorted = devs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            RatePoint {
                n: *n,
                k: *k,
                trials: devs.len(),
                mean_deviation: mean,
                q90_deviation: quantile_nearest_rank(&sorted, 0.9),
            }
        })
        .collect();
    let ks: Vec<f64> = points.iter().map(|p| p.k as f64).collect();
    let means: Vec<f64> = points.iter().map(|p| p.mean_deviation).collect();
    let fit = fit_rate(&ks, &means)?;
    Ok(RateReport {
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
    })
}

/// Run the full grid and fit the rate. The tail-count grid must span at
/// least one decade for the fit to mean anything.
pub fn rate_experiment(cfg: &ExperimentConfig) -> Result<(Vec<TrialResult>, RateReport)> {
    cfg.validate()?;
    let ks: Vec<usize> = cfg
        .n_grid
        .iter()
        .map(|&n| crate::data::tail_rank(cfg.alpha, n))
        .collect();
    let (min_k, max_k) = (
        *ks.iter().min().expect("non-empty grid"),
        *ks.iter().max().expect("non-empty grid"),
    );
    if (max_k as f64) < 10.0 * min_k as f64 {
        return Err(Error::invalid(format!(
            "rate experiment needs the tail-count grid to span a decade (got k in [{min_k}, {max_k}])"
        )));
    }
    let trials = run_trials(cfg)?;
    let report = rate_report_from_trials(&trials)?;
    Ok((trials, report))
}

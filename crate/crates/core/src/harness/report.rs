//! Report writers. All output is deterministic: struct-ordered JSON and
//! shortest-round-trip float formatting, so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::bounds::FormulaId;
use crate::error::Result;
use crate::harness::coverage::CoverageRow;
use crate::harness::rate::RatePoint;
use crate::harness::trial::TrialResult;
use crate::harness::ztail::ZTailRow;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per trial.
pub fn trials_csv(trials: &[TrialResult]) -> String {
    let mut out = String::from(
        "n,k,trial_index,alpha,m,scheme,data_seed,mc_seed,\
         cv_empirical,full_empirical,cv_pseudo,cv_true,full_true,\
         d_threshold,d_cv,bias,mc_stderr,degenerate_folds,deviation,z_value,\
         delta_ref,radius_cv_exponential,radius_kfold_exponential,\
         radius_cv_polynomial,radius_lpo_polynomial,\
         cv_ge_empirical_ok,split_identity_max_err,fold_average_max_err,\
         threshold_gap_bound_ok,exceedance_count_ok,mask_balance_ok,all_ok\n",
    );
    for t in trials {
        let r = &t.report;
        let c = &t.checks;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.n,
            t.k,
            t.trial_index,
            t.alpha,
            t.m,
            t.scheme,
            t.data_seed,
            t.mc_seed,
            r.cv_empirical,
            r.full_empirical,
            r.cv_pseudo,
            r.cv_true,
            r.full_true,
            r.d_threshold,
            r.d_cv,
            r.bias,
            r.mc_stderr,
            r.degenerate_folds,
            t.deviation(),
            t.z_value,
            t.delta_ref,
            opt(t.radius(FormulaId::CvExponential)),
            opt(t.radius(FormulaId::KfoldExponential)),
            opt(t.radius(FormulaId::CvPolynomial)),
            opt(t.radius(FormulaId::LpoPolynomial)),
            c.cv_ge_empirical_ok,
            c.split_identity_max_err,
            c.fold_average_max_err,
            c.threshold_gap_bound_ok,
            c.exceedance_count_ok,
            c.mask_balance_ok,
            c.all_ok(),
        )
        .expect("string write");
    }
    out
}

/// Plot-ready deviation-vs-k table.
pub fn rate_plot_csv(points: &[RatePoint]) -> String {
    let mut out = String::from("k,n,trials,mean_deviation,q90_deviation\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.k, p.n, p.trials, p.mean_deviation, p.q90_deviation
        )
        .expect("string write");
    }
    out
}

/// Plot-ready coverage table (delta vs empirical coverage per formula).
pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from(
        "n,delta,formula,radius,coverage_target,empirical_coverage,trials,m_const,m5_const,diagnostic\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.delta,
            r.formula_id,
            r.radius,
            r.coverage_target,
            r.empirical_coverage,
            r.trials,
            r.m_const,
            r.m5_const,
            r.diagnostic,
        )
        .expect("string write");
    }
    out
}

/// Plot-ready Z tail table.
pub fn ztail_csv(rows: &[ZTailRow]) -> String {
    let mut out = String::from(
        "n,t,envelope,z_mean,exceed_mean_centered,center_bound,exceed_bound_centered,trials,dominated\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.t,
            r.envelope,
            r.z_mean,
            r.exceed_mean_centered,
            r.center_bound,
            r.exceed_bound_centered,
            r.trials,
            r.dominated(),
        )
        .expect("string write");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

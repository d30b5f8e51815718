//! Seeded Monte Carlo experiment runner: per-trial estimation with hard
//! exact-identity checks, deviation-rate fitting, coverage diagnostics,
//! Z-tail dominance tables, and deterministic report writing.

pub mod config;
pub mod coverage;
pub mod rate;
pub mod report;
pub mod trial;
pub mod verify;
pub mod ztail;

pub use config::{ClassConfig, ExperimentConfig, SchemeConfig};
pub use coverage::{coverage_diagnostic, coverage_table, empirical_coverage, CoverageRow};
pub use rate::{fit_rate, rate_experiment, rate_report_from_trials, RatePoint, RateReport};
pub use trial::{run_trial, run_trials, TrialChecks, TrialResult, IDENTITY_TOLERANCE};
pub use verify::{
    exact_identity_suite, generator_suite, mask_balance_suite, run_all, SuiteOutcome,
};
pub use ztail::{z_tail_check, z_tail_table, ZTailRow};

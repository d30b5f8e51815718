//! `tailcv` — seeded experiments on cross-validation risk estimation for
//! classifiers evaluated on rare tail regions.
//!
//! One JSON config file drives every subcommand; scalar fields can be
//! overridden from the command line. All outputs are deterministic given
//! the config.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tailcv::bounds::BoundValue;
use tailcv::harness::report::{
    coverage_csv, rate_plot_csv, trials_csv, write_json, write_text, ztail_csv,
};
use tailcv::harness::trial::bound_rows;
use tailcv::harness::{
    coverage_table, run_trial, run_trials, z_tail_table, ExperimentConfig, SchemeConfig,
    TrialResult,
};
use tailcv::masks::{verify_training_balance, verify_validation_balance};
use tailcv::rng::derive_seed;
use tailcv::sim::sample;
use tailcv::BoundInputs64;

#[derive(Parser)]
#[command(
    name = "tailcv",
    version,
    about = "Cross-validation risk estimation conditional on rare tail events"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's output_dir, then ".".
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the config's master seed.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Override the config's trials per grid point.
    #[arg(long)]
    trials_per_n: Option<usize>,
    /// Override the config's conditional Monte Carlo sample size.
    #[arg(long)]
    m: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = ExperimentConfig::from_json_file(&self.config)
            .with_context(|| format!("loading config {}", self.config.display()))?;
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(seed) = self.master_seed {
            cfg.master_seed = seed;
        }
        if let Some(t) = self.trials_per_n {
            cfg.trials_per_n = t;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        cfg.validate()?;
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out)
            .with_context(|| format!("creating output dir {}", out.display()))?;
        Ok((cfg, out))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dataset and write its CSV plus JSON sidecar.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Sample size; defaults to the first n_grid entry.
        #[arg(long)]
        n: Option<usize>,
        /// Trial index the data seed is derived for.
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Build the configured mask sequence and verify its balance exactly.
    Masks {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Run one full trial: estimates, decomposition, Z, radii, checks.
    Cv {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Evaluate every bound formula over the config's n and delta grids.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Standalone inputs (JSON file with n, n_t, n_v, alpha, vc,
        /// m_const, m5_const, delta); replaces the config grids.
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Sweep variable for the CSV: "n" (at the first delta) or
        /// "delta" (at the first n).
        #[arg(long, default_value = "delta")]
        sweep: String,
    },
    /// Deviation-rate experiment: log-log fit of mean deviation vs k.
    Rate {
        #[command(flatten)]
        common: Common,
    },
    /// Coverage diagnostic over the delta grid (never an assertion).
    Coverage {
        #[command(flatten)]
        common: Common,
    },
    /// Z-tail dominance table against the Bernstein envelope.
    Ztail {
        #[command(flatten)]
        common: Common,
    },
    /// Run the exact-identity verification suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Randomized instances for the exact-identity suite.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Serialize)]
struct TrialFile<'a> {
    config: &'a ExperimentConfig,
    result: &'a TrialResult,
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    delta: f64,
    #[serde(flatten)]
    value: BoundValue<f64>,
}

fn default_n(cfg: &ExperimentConfig, n: Option<usize>) -> usize {
    n.unwrap_or(cfg.n_grid[0])
}

/// Hard per-trial assertions decide the exit code.
fn exit_for(trials: &[TrialResult]) -> Result<ExitCode> {
    let failed = trials.iter().filter(|t| !t.checks.all_ok()).count();
    if failed > 0 {
        eprintln!(
            "HARD ASSERTION FAILURES in {failed} of {} trials",
            trials.len()
        );
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn scheme_n_v(cfg: &ExperimentConfig, n: usize) -> usize {
    match cfg.scheme {
        SchemeConfig::KFold { k } => n / k,
        SchemeConfig::Loo => 1,
        SchemeConfig::LpoExact { p, .. } | SchemeConfig::LpoBalanced { p, .. } => p,
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Generate { common, n, trial } => {
            let (cfg, out) = common.load()?;
            let n = default_n(&cfg, n);
            let seed = derive_seed(cfg.master_seed, "data", &[n as u64, trial]);
            let dataset = sample(&cfg.generator, n, seed)?;
            let csv_path = out.join("dataset.csv");
            let sidecar_path = out.join("dataset.json");
            dataset.save_files(&csv_path, &sidecar_path)?;
            println!(
                "wrote {} and {} (n={n}, d={}, seed={seed})",
                csv_path.display(),
                sidecar_path.display(),
                dataset.dim()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Masks { common, n, trial } => {
            let (cfg, out) = common.load()?;
            let n = default_n(&cfg, n);
            let masks = cfg.masks_for(n, trial)?;
            let validation = verify_validation_balance(&masks);
            let training = verify_training_balance(&masks);
            write_text(&out.join("masks.json"), &(masks.to_json()? + "\n"))?;
            #[derive(Serialize)]
            struct BalanceFile {
                validation: tailcv::masks::BalanceSummary,
                training: tailcv::masks::BalanceSummary,
            }
            write_json(
                &out.join("balance.json"),
                &BalanceFile {
                    validation: validation.summary(),
                    training: training.summary(),
                },
            )?;
            println!(
                "scheme {} on n={n}: K={}, n_V={}, validation balanced={}, training balanced={}",
                masks.scheme(),
                masks.k(),
                masks.n_v(),
                validation.is_balanced(),
                training.is_balanced()
            );
            if !(validation.is_balanced() && training.is_balanced()) {
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cv { common, n, trial } => {
            let (cfg, out) = common.load()?;
            let n = default_n(&cfg, n);
            let result = run_trial(&cfg, n, trial)?;
            write_json(
                &out.join("trial.json"),
                &TrialFile {
                    config: &cfg,
                    result: &result,
                },
            )?;
            let r = &result.report;
            println!(
                "n={n} k={}: cv={:.6} full={:.6} pseudo={:.6} cv_true={:.6} full_true={:.6}",
                result.k, r.cv_empirical, r.full_empirical, r.cv_pseudo, r.cv_true, r.full_true
            );
            println!(
                "gaps: d_threshold={:.6} d_cv={:.6} bias={:.6} |deviation|={:.6} z={:.6}",
                r.d_threshold,
                r.d_cv,
                r.bias,
                result.deviation(),
                result.z_value
            );
            println!("checks ok: {}", result.checks.all_ok());
            exit_for(std::slice::from_ref(&result))
        }
        Command::Bounds {
            common,
            inputs,
            sweep,
        } => {
            let (cfg, out) = common.load()?;
            let mut rows: Vec<BoundRow> = Vec::new();
            match inputs {
                Some(path) => {
                    let inputs: BoundInputs64 =
                        serde_json::from_str(&std::fs::read_to_string(&path)?)?;
                    inputs.validate()?;
                    for value in standalone_rows(&inputs)? {
                        rows.push(BoundRow {
                            n: inputs.n,
                            delta: inputs.delta,
                            value,
                        });
                    }
                }
                None => {
                    let vc = cfg.build_class()?.vc_proxy();
                    if vc <= 0.0 {
                        bail!("the configured class has vc proxy 0; no bound is evaluable");
                    }
                    for &n in &cfg.n_grid {
                        let masks = cfg.masks_for(n, 0)?;
                        for &delta in &cfg.delta_grid {
                            for value in bound_rows(&cfg, &masks, vc, delta)? {
                                rows.push(BoundRow { n, delta, value });
                            }
                        }
                    }
                }
            }
            write_json(&out.join("bounds.json"), &rows)?;
            let csv = bounds_sweep_csv(&rows, &sweep, &cfg)?;
            write_text(&out.join("bounds_sweep.csv"), &csv)?;
            println!("wrote {} bound rows; sweep over {sweep}", rows.len());
            for row in rows.iter().take(8) {
                println!(
                    "  n={} delta={} {}: radius={:.6} coverage={:.3}",
                    row.n, row.delta, row.value.formula_id, row.value.radius, row.value.coverage
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rate { common } => {
            let (cfg, out) = common.load()?;
            let (trials, report) = tailcv::harness::rate_experiment(&cfg)?;
            write_text(&out.join("trials.csv"), &trials_csv(&trials))?;
            write_json(&out.join("rate_report.json"), &report)?;
            write_text(&out.join("rate_plot.csv"), &rate_plot_csv(&report.points))?;
            println!(
                "rate fit over k in [{}, {}]: slope={:.4} intercept={:.4} R^2={:.4}",
                report.points.first().map(|p| p.k).unwrap_or(0),
                report.points.last().map(|p| p.k).unwrap_or(0),
                report.slope,
                report.intercept,
                report.r_squared
            );
            exit_for(&trials)
        }
        Command::Coverage { common } => {
            let (cfg, out) = common.load()?;
            let trials = run_trials(&cfg)?;
            let rows = coverage_table(&cfg, &trials)?;
            write_text(&out.join("trials.csv"), &trials_csv(&trials))?;
            write_json(&out.join("coverage.json"), &rows)?;
            write_text(&out.join("coverage.csv"), &coverage_csv(&rows))?;
            println!(
                "DIAGNOSTIC coverage (constants M={}, M5={} are stand-ins):",
                cfg.m_const, cfg.m5_const
            );
            for r in &rows {
                println!(
                    "  n={} delta={} {}: empirical={:.3} target={:.3}",
                    r.n, r.delta, r.formula_id, r.empirical_coverage, r.coverage_target
                );
            }
            exit_for(&trials)
        }
        Command::Ztail { common } => {
            let (cfg, out) = common.load()?;
            let trials = run_trials(&cfg)?;
            let rows = z_tail_table(&cfg, &trials)?;
            write_text(&out.join("trials.csv"), &trials_csv(&trials))?;
            write_json(&out.join("ztail.json"), &rows)?;
            write_text(&out.join("ztail.csv"), &ztail_csv(&rows))?;
            let dominated = rows.iter().all(|r| r.dominated());
            println!(
                "Z tail: {} grid points, envelope dominates mean-centered frequencies: {dominated}",
                rows.len()
            );
            for r in &rows {
                println!(
                    "  n={} t={:.2}: empirical={:.4} envelope={:.4}",
                    r.n, r.t, r.exceed_mean_centered, r.envelope
                );
            }
            exit_for(&trials)
        }
        Command::Verify { common, trials } => {
            let (cfg, out) = common.load()?;
            let outcomes = vec![
                tailcv::harness::exact_identity_suite(cfg.master_seed, trials)?,
                tailcv::harness::mask_balance_suite(60, cfg.master_seed)?,
                tailcv::harness::generator_suite(cfg.master_seed)?,
            ];
            write_json(&out.join("verify.json"), &outcomes)?;
            let mut all_ok = true;
            for o in &outcomes {
                println!("{}", o.status_line());
                all_ok &= o.passed;
            }
            if all_ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn standalone_rows(inputs: &BoundInputs64) -> Result<Vec<BoundValue<f64>>> {
    use tailcv::bounds::{cv_exponential_radius, cv_polynomial_radius, kfold_radius, lpo_radius};
    let mut rows = vec![
        cv_exponential_radius(inputs)?,
        cv_polynomial_radius(inputs)?,
    ];
    if inputs.n.is_multiple_of(inputs.n_v) && inputs.n / inputs.n_v >= 2 {
        rows.push(kfold_radius(inputs)?);
    }
    rows.push(lpo_radius(inputs)?);
    Ok(rows)
}

fn bounds_sweep_csv(rows: &[BoundRow], sweep: &str, cfg: &ExperimentConfig) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::from("sweep,n,n_v,delta,formula,radius,coverage\n");
    let (fixed_n, fixed_delta) = (cfg.n_grid[0], cfg.delta_grid[0]);
    for row in rows {
        let keep = match sweep {
            "n" => row.delta == fixed_delta,
            "delta" => row.n == fixed_n,
            other => bail!("unknown sweep variable {other:?}; use \"n\" or \"delta\""),
        };
        if keep {
            writeln!(
                out,
                "{sweep},{},{},{},{},{},{}",
                row.n,
                scheme_n_v(cfg, row.n),
                row.delta,
                row.value.formula_id,
                row.value.radius,
                row.value.coverage
            )
            .expect("string write");
        }
    }
    Ok(out)
}

/// Die quietly on a closed pipe (`tailcv ... | head`) instead of
/// panicking in a stdout write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

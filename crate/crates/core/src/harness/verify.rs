//! Randomized exact-identity verification suites.
//!
//! These run the identities that must hold with zero violations — the
//! CV-dominates-ERM inequality, the weighted split identity, the
//! fold-average identity, exact mask balance, and the generator's
//! closed-form laws — over randomized instances, and report a single
//! pass/fail plus the worst observed error for each suite.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::order_stat_threshold;
use crate::error::Result;
use crate::harness::trial::{identity_checks, IDENTITY_TOLERANCE};
use crate::learners::{build_angular_grid, erm, HammingCost};
use crate::masks::{
    kfold_masks, loo_masks, lpo_masks_balanced, lpo_masks_exact, verify_training_balance,
    verify_validation_balance, MaskSequence,
};
use crate::risk::{cv_risk, ThresholdPolicy};
use crate::rng::{derive_seed, stream_rng};
use crate::sim::{
    sample, sample_conditional, true_quantile, AngularLaw, GeneratorSpec, LabelModel,
};
use crate::stats::{ks_critical_one_sample, ks_statistic};

/// Outcome of one verification suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

impl SuiteOutcome {
    pub fn status_line(&self) -> String {
        format!(
            "[{}] {}: {} ({} cases)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.cases
        )
    }
}

fn random_masks(rng: &mut impl Rng, alpha: f64) -> Result<(usize, MaskSequence)> {
    // Smallest n keeping floor(alpha*n) >= 1 for alpha in {0.2, 0.5}.
    let n_floor: usize = if alpha < 0.5 { 5 } else { 2 };
    Ok(match rng.random_range(0..3u8) {
        0 => {
            let k = rng.random_range(2..=6usize);
            let max_blocks = (60 / k).max(2);
            let blocks = rng.random_range(2..=max_blocks.min(10));
            let n = (k * blocks).max(n_floor.div_ceil(k) * k);
            (n, kfold_masks(n, k, None)?)
        }
        1 => {
            let n = rng.random_range(n_floor.max(5)..=40usize);
            (n, loo_masks(n)?)
        }
        _ => {
            let n = rng.random_range(6..=12usize);
            let p = rng.random_range(2..=3usize);
            (n, lpo_masks_exact(n, p, 10_000)?)
        }
    })
}

fn random_generator(rng: &mut impl Rng, d: usize) -> Result<GeneratorSpec<f64>> {
    let gamma = [0.8, 1.5, 2.5][rng.random_range(0..3usize)];
    let eta = if rng.random::<bool>() {
        LabelModel::Constant {
            q: [0.3, 0.5][rng.random_range(0..2usize)],
        }
    } else {
        let mut direction = vec![0.0; d];
        direction[rng.random_range(0..d)] = 1.0;
        LabelModel::HalfspaceNoise {
            direction,
            eps: 0.2,
        }
    };
    GeneratorSpec::new(d, gamma, AngularLaw::UniformSphere, eta)
}

/// Randomized trials of the exact identities under the shared-threshold
/// policy: the CV estimate never undercuts the full-sample empirical risk
/// of its minimizer, the weighted split identity and the fold-average
/// identity hold to 1e-12, and built-in masks balance exactly.
pub fn exact_identity_suite(seed: u64, trials: usize) -> Result<SuiteOutcome> {
    let mut rng = stream_rng(seed, "verify-exact", &[]);
    let mut violations = 0usize;
    let mut max_split = 0.0f64;
    let mut max_fold_avg = 0.0f64;
    let mut min_slack = f64::INFINITY;
    for trial in 0..trials {
        let alpha = if rng.random::<bool>() { 0.2 } else { 0.5 };
        let (n, masks) = random_masks(&mut rng, alpha)?;
        let d = rng.random_range(2..=3usize);
        let spec = random_generator(&mut rng, d)?;
        let class = build_angular_grid(
            d,
            rng.random_range(1..=8usize),
            &[-0.6, -0.2, 0.2, 0.6][..rng.random_range(1..=4usize)],
            derive_seed(seed, "verify-class", &[trial as u64]),
        )?;
        let dataset = sample(&spec, n, derive_seed(seed, "verify-data", &[trial as u64]))?;

        if !verify_validation_balance(&masks).is_balanced()
            || !verify_training_balance(&masks).is_balanced()
        {
            violations += 1;
            continue;
        }
        let policy = ThresholdPolicy::FullSampleOrderStat;
        let cv = cv_risk(&class, &HammingCost, &dataset, &masks, alpha, &policy)?;
        let thr = order_stat_threshold(&dataset, alpha)?;
        let all: Vec<usize> = (0..n).collect();
        let full = erm(&class, &HammingCost, &dataset, &all, alpha, &thr)?;
        min_slack = min_slack.min(cv.estimate - full.risk);
        if cv.estimate < full.risk - IDENTITY_TOLERANCE {
            violations += 1;
        }
        let (split, fold_avg) = identity_checks(&class, &dataset, &masks, alpha)?;
        max_split = max_split.max(split);
        max_fold_avg = max_fold_avg.max(fold_avg);
    }
    let passed =
        violations == 0 && max_split <= IDENTITY_TOLERANCE && max_fold_avg <= IDENTITY_TOLERANCE;
    Ok(SuiteOutcome {
        name: "exact-identities",
        passed,
        cases: trials,
        detail: format!(
            "violations={violations}, max split err={max_split:.2e}, \
             max fold-average err={max_fold_avg:.2e}, min cv-minus-full={min_slack:.2e}"
        ),
    })
}

/// Exhaustive mask balance: K-fold for every divisor K of every n up to
/// `max_n`, leave-one-out up to `max_n`, exhaustive leave-p-out while
/// `C(n,p) <= 10_000`, and the blocked sampler for `p | n`, rounds up to 10.
pub fn mask_balance_suite(max_n: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut cases = 0usize;
    let mut failures = 0usize;
    let mut check = |masks: &MaskSequence| {
        cases += 1;
        if !verify_validation_balance(masks).is_balanced()
            || !verify_training_balance(masks).is_balanced()
        {
            failures += 1;
        }
    };
    for n in 2..=max_n {
        check(&loo_masks(n)?);
        for k in 2..=n {
            if n % k == 0 {
                check(&kfold_masks(n, k, None)?);
            }
        }
        for p in 1..n {
            match lpo_masks_exact(n, p, 10_000) {
                Ok(masks) => check(&masks),
                Err(crate::error::Error::EnumerationTooLarge { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        for p in (1..n).filter(|p| n % p == 0) {
            for rounds in [1usize, 3, 10] {
                check(&lpo_masks_balanced(
                    n,
                    p,
                    rounds,
                    derive_seed(seed, "balance", &[n as u64, p as u64, rounds as u64]),
                )?);
            }
        }
    }
    Ok(SuiteOutcome {
        name: "mask-balance",
        passed: failures == 0,
        cases,
        detail: format!("failures={failures} (exact rational residuals)"),
    })
}

/// Generator correctness at fixed seeds: marginal and conditional radius
/// laws pass Kolmogorov–Smirnov at the 1% level on 1e5 draws, and the tail
/// quantile is exact.
pub fn generator_suite(seed: u64) -> Result<SuiteOutcome> {
    let gamma = 2.0;
    let spec = GeneratorSpec::new(
        3,
        gamma,
        AngularLaw::UniformSphere,
        LabelModel::Constant { q: 0.5 },
    )?;
    let m = 100_000usize;
    let crit = ks_critical_one_sample(m, 0.01);

    let ds = sample(&spec, m, derive_seed(seed, "gen-marginal", &[]))?;
    let mut radii: Vec<f64> = ds.norms().to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d_marginal = ks_statistic(&radii, |r| 1.0 - r.powf(-gamma));

    let alpha = 0.05;
    let t = true_quantile(&spec, alpha)?;
    let pts = sample_conditional(&spec, alpha, m, derive_seed(seed, "gen-conditional", &[]))?;
    let mut cond: Vec<f64> = pts
        .iter()
        .map(|p| p.x.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    cond.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d_conditional = ks_statistic(&cond, |r| 1.0 - (r / t).powf(-gamma));

    let quantile_exact = true_quantile(&spec, 0.01)? == 10.0;
    let passed = d_marginal < crit && d_conditional < crit && quantile_exact;
    Ok(SuiteOutcome {
        name: "generator-laws",
        passed,
        cases: 2 * m,
        detail: format!(
            "marginal KS={d_marginal:.5} cond KS={d_conditional:.5} (crit {crit:.5}), \
             quantile exact={quantile_exact}"
        ),
    })
}

/// All verification suites with default sizes.
pub fn run_all(seed: u64) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        exact_identity_suite(seed, 1000)?,
        mask_balance_suite(60, seed)?,
        generator_suite(seed)?,
    ])
}

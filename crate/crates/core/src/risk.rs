//! Risk functionals for classification conditional on tail exceedance.
//!
//! The conditional empirical risk of a classifier `g` over a subset `S` is
//!
//! ```text
//! (1 / (alpha · |S|)) · Σ_{i ∈ S} c(g, O_i) · 1{‖X_i‖ > threshold}
//! ```
//!
//! where the threshold is either the `floor(alpha·n)`-th largest norm of
//! the sample (observable) or the true `1−alpha` norm quantile
//! (unobservable; computable here because the generators know their
//! quantiles — the "pseudo" variant). Monte Carlo evaluation against exact
//! conditional samples provides the true risk, and the difference between
//! the cross-validated estimate and the true risk of the full-sample
//! minimizer splits into three non-negative terms: a threshold-estimation
//! gap, a validation deviation, and a model-selection bias.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{
    order_stat_threshold, order_stat_threshold_subset, Dataset, LabeledPoint, TailThreshold,
};
use crate::error::{Error, Result};
use crate::learners::{erm, Classifier, Cost, ErmFit, HypothesisClass};
use crate::masks::MaskSequence;
use crate::scalar::Real;
use crate::sim::{sample_conditional, GeneratorSpec};
use crate::stats::mean_and_stderr;

/// How thresholds are chosen when estimating risks on subsets.
///
/// `FullSampleOrderStat` shares the full-sample order statistic across
/// every subset; this is the only policy under which the exact split and
/// fold-average identities (and the CV-dominates-ERM inequality) hold.
/// `PerSubsetOrderStat` recomputes the order statistic inside each subset —
/// the leakage-free variant — and `TrueQuantile` plugs in a known quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum ThresholdPolicy<F> {
    FullSampleOrderStat,
    PerSubsetOrderStat,
    TrueQuantile(F),
}

impl<F: Real> ThresholdPolicy<F> {
    pub fn threshold_for(
        &self,
        dataset: &Dataset<F>,
        alpha: F,
        subset: &[usize],
    ) -> Result<TailThreshold<F>> {
        match self {
            ThresholdPolicy::FullSampleOrderStat => order_stat_threshold(dataset, alpha),
            ThresholdPolicy::PerSubsetOrderStat => {
                order_stat_threshold_subset(dataset, subset, alpha)
            }
            ThresholdPolicy::TrueQuantile(t) => Ok(TailThreshold::true_quantile(*t, alpha)),
        }
    }
}

fn check_alpha<F: Real>(alpha: F) -> Result<()> {
    if !(alpha > F::zero() && alpha <= F::one()) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Empirical tail risk of `g` on `subset`, normalized by `alpha · |subset|`.
/// Exceedance is strict (`‖X_i‖ > threshold.value`); an exceedance-free
/// subset yields 0 by the empty-sum convention. Values can exceed 1 but
/// never `1/alpha`.
pub fn empirical_tail_risk<F: Real, C: Cost<F>>(
    g: &Classifier<F>,
    cost: &C,
    dataset: &Dataset<F>,
    subset: &[usize],
    threshold: &TailThreshold<F>,
    alpha: F,
) -> Result<F> {
    if subset.is_empty() {
        return Err(Error::EmptySubset {
            context: "empirical tail risk",
        });
    }
    check_alpha(alpha)?;
    let mut sum = F::zero();
    for &i in subset {
        if dataset.norm(i) > threshold.value {
            sum = sum + cost.cost(g, dataset.point(i));
        }
    }
    Ok(sum / (alpha * F::of_usize(subset.len())))
}

/// Empirical tail risk with a fixed known threshold `t_alpha` in place of
/// the order statistic.
pub fn pseudo_empirical_risk<F: Real, C: Cost<F>>(
    g: &Classifier<F>,
    cost: &C,
    dataset: &Dataset<F>,
    subset: &[usize],
    t_alpha: F,
    alpha: F,
) -> Result<F> {
    let thr = TailThreshold::true_quantile(t_alpha, alpha);
    empirical_tail_risk(g, cost, dataset, subset, &thr, alpha)
}

/// Mean cost of `g` over an explicit sample of (conditional) draws, with
/// its standard error.
pub fn mc_cost_mean<F: Real, C: Cost<F>>(
    g: &Classifier<F>,
    cost: &C,
    points: &[LabeledPoint<F>],
) -> (F, F) {
    let costs: Vec<F> = points.iter().map(|o| cost.cost(g, o)).collect();
    mean_and_stderr(&costs)
}

/// Monte Carlo estimate of the true conditional risk of `g`: the mean cost
/// over `m` exact draws from the law of `O` given `‖X‖ ≥ t_alpha`.
pub fn true_risk_mc<F: Real, C: Cost<F>>(
    g: &Classifier<F>,
    cost: &C,
    spec: &GeneratorSpec<F>,
    alpha: F,
    m: usize,
    rng_seed: u64,
) -> Result<(F, F)> {
    let sample = sample_conditional(spec, alpha, m, rng_seed)?;
    Ok(mc_cost_mean(g, cost, &sample))
}

/// Per-fold outcome of a cross-validation pass.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FoldOutcome<F> {
    pub fold: usize,
    pub classifier_id: usize,
    pub validation_risk: F,
    /// The training subset had no exceedance; the fitted rule is the
    /// lowest-id default.
    pub train_degenerate: bool,
    /// Strict exceedances inside the validation set; zero means the fold
    /// contributed 0 to the average.
    pub validation_exceedances: usize,
}

/// Cross-validated risk estimate with per-fold detail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvRisk<F> {
    pub estimate: F,
    pub per_fold: Vec<FoldOutcome<F>>,
    /// Folds whose validation set had no exceedance.
    pub degenerate_folds: usize,
}

fn fit_folds<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    masks: &MaskSequence,
    alpha: F,
    policy: &ThresholdPolicy<F>,
) -> Result<Vec<(ErmFit<F>, Vec<usize>)>> {
    if masks.n() != dataset.n() {
        return Err(Error::LengthMismatch {
            context: "mask sequence vs dataset size",
            expected: dataset.n(),
            got: masks.n(),
        });
    }
    let mut fits = Vec::with_capacity(masks.k());
    for j in 0..masks.k() {
        let train = masks.training_set(j);
        if train.is_empty() {
            return Err(Error::EmptySubset {
                context: "cross-validation training set",
            });
        }
        let thr = policy.threshold_for(dataset, alpha, &train)?;
        let fit = erm(class, cost, dataset, &train, alpha, &thr)?;
        fits.push((fit, train));
    }
    Ok(fits)
}

/// Cross-validated risk estimate: for each mask, fit by exact ERM on the
/// training complement and evaluate the empirical tail risk of the fitted
/// rule on the validation set, both under `policy`; average over masks.
pub fn cv_risk<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    masks: &MaskSequence,
    alpha: F,
    policy: &ThresholdPolicy<F>,
) -> Result<CvRisk<F>> {
    let fits = fit_folds(class, cost, dataset, masks, alpha, policy)?;
    let mut per_fold = Vec::with_capacity(masks.k());
    let mut sum = F::zero();
    let mut degenerate_folds = 0usize;
    for (j, (fit, _train)) in fits.iter().enumerate() {
        let val = masks.validation_set(j);
        let thr = policy.threshold_for(dataset, alpha, val)?;
        let g = class.get(fit.classifier_id);
        let r = empirical_tail_risk(g, cost, dataset, val, &thr, alpha)?;
        let exceed = val.iter().filter(|&&i| dataset.norm(i) > thr.value).count();
        if exceed == 0 {
            degenerate_folds += 1;
        }
        sum = sum + r;
        per_fold.push(FoldOutcome {
            fold: j,
            classifier_id: fit.classifier_id,
            validation_risk: r,
            train_degenerate: fit.degenerate,
            validation_exceedances: exceed,
        });
    }
    Ok(CvRisk {
        estimate: sum / F::of_usize(masks.k()),
        per_fold,
        degenerate_folds,
    })
}

/// Average true risk of the per-fold fitted rules, by Monte Carlo on one
/// frozen conditional sample shared across classifiers (so differences
/// between rules carry no sampling noise).
#[allow(clippy::too_many_arguments)]
pub fn cv_true_risk<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    masks: &MaskSequence,
    alpha: F,
    policy: &ThresholdPolicy<F>,
    spec: &GeneratorSpec<F>,
    m: usize,
    rng_seed: u64,
) -> Result<F> {
    let fits = fit_folds(class, cost, dataset, masks, alpha, policy)?;
    let sample = sample_conditional(spec, alpha, m, rng_seed)?;
    let mut cache: BTreeMap<usize, F> = BTreeMap::new();
    let mut sum = F::zero();
    for (fit, _) in &fits {
        let r = *cache
            .entry(fit.classifier_id)
            .or_insert_with(|| mc_cost_mean(class.get(fit.classifier_id), cost, &sample).0);
        sum = sum + r;
    }
    Ok(sum / F::of_usize(masks.k()))
}

/// Average pseudo risk of the per-fold fitted rules: training uses the
/// full-sample order statistic (the fitted rules are the observable ERM
/// rules), evaluation uses the fixed threshold `t_alpha` on each
/// validation set.
pub fn cv_pseudo_risk<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    masks: &MaskSequence,
    alpha: F,
    t_alpha: F,
) -> Result<F> {
    let policy = ThresholdPolicy::FullSampleOrderStat;
    let fits = fit_folds(class, cost, dataset, masks, alpha, &policy)?;
    let mut sum = F::zero();
    for (j, (fit, _)) in fits.iter().enumerate() {
        let g = class.get(fit.classifier_id);
        sum =
            sum + pseudo_empirical_risk(g, cost, dataset, masks.validation_set(j), t_alpha, alpha)?;
    }
    Ok(sum / F::of_usize(masks.k()))
}

/// Everything the error decomposition produces for one dataset/mask pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiskReport<F> {
    /// Cross-validated empirical estimate (order-statistic threshold).
    pub cv_empirical: F,
    /// Empirical tail risk of the full-sample minimizer on the full sample.
    pub full_empirical: F,
    /// Average pseudo risk of the per-fold rules at the true threshold.
    pub cv_pseudo: F,
    /// Average true risk of the per-fold rules (Monte Carlo).
    pub cv_true: F,
    /// True risk of the full-sample minimizer (Monte Carlo).
    pub full_true: F,
    /// |cv_empirical − cv_pseudo|: threshold-estimation gap.
    pub d_threshold: F,
    /// |cv_pseudo − cv_true|: validation deviation.
    pub d_cv: F,
    /// |cv_true − full_true|: model-selection bias.
    pub bias: F,
    /// Largest standard error among the Monte Carlo terms above.
    pub mc_stderr: F,
    pub degenerate_folds: usize,
}

impl<F: Real> RiskReport<F> {
    /// Absolute deviation of the CV estimate from the true risk of the
    /// full-sample rule; bounded by the three decomposition terms.
    pub fn deviation(&self) -> F {
        (self.cv_empirical - self.full_true).abs()
    }
}

/// The full decomposition pipeline under the full-sample order-statistic
/// policy: fits per-fold and full-sample rules, evaluates all five risk
/// aggregates, and returns the three gap terms.
///
/// All true-risk terms are evaluated on one frozen conditional sample of
/// size `m` drawn from `spec` at level `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn decomposition<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    masks: &MaskSequence,
    alpha: F,
    t_alpha: F,
    spec: &GeneratorSpec<F>,
    m: usize,
    rng_seed: u64,
) -> Result<RiskReport<F>> {
    let policy = ThresholdPolicy::FullSampleOrderStat;
    let full_thr = order_stat_threshold(dataset, alpha)?;
    let all: Vec<usize> = (0..dataset.n()).collect();

    let fits = fit_folds(class, cost, dataset, masks, alpha, &policy)?;
    let full_fit = erm(class, cost, dataset, &all, alpha, &full_thr)?;

    // One frozen conditional sample shared by every true-risk evaluation.
    let sample = sample_conditional(spec, alpha, m, rng_seed)?;
    let mut cache: BTreeMap<usize, (F, F)> = BTreeMap::new();
    let mut true_of = |id: usize| -> (F, F) {
        *cache
            .entry(id)
            .or_insert_with(|| mc_cost_mean(class.get(id), cost, &sample))
    };

    let k = F::of_usize(masks.k());
    let mut cv_empirical = F::zero();
    let mut cv_pseudo = F::zero();
    let mut cv_true = F::zero();
    let mut degenerate_folds = 0usize;
    let mut mc_stderr = F::zero();
    for (j, (fit, _)) in fits.iter().enumerate() {
        let val = masks.validation_set(j);
        let g = class.get(fit.classifier_id);
        cv_empirical = cv_empirical + empirical_tail_risk(g, cost, dataset, val, &full_thr, alpha)?;
        cv_pseudo = cv_pseudo + pseudo_empirical_risk(g, cost, dataset, val, t_alpha, alpha)?;
        let (r, se) = true_of(fit.classifier_id);
        cv_true = cv_true + r;
        mc_stderr = mc_stderr.max(se);
        if !val.iter().any(|&i| dataset.norm(i) > full_thr.value) {
            degenerate_folds += 1;
        }
    }
    cv_empirical = cv_empirical / k;
    cv_pseudo = cv_pseudo / k;
    cv_true = cv_true / k;

    let full_empirical = empirical_tail_risk(
        class.get(full_fit.classifier_id),
        cost,
        dataset,
        &all,
        &full_thr,
        alpha,
    )?;
    let (full_true, full_se) = true_of(full_fit.classifier_id);
    mc_stderr = mc_stderr.max(full_se);

    Ok(RiskReport {
        cv_empirical,
        full_empirical,
        cv_pseudo,
        cv_true,
        full_true,
        d_threshold: (cv_empirical - cv_pseudo).abs(),
        d_cv: (cv_pseudo - cv_true).abs(),
        bias: (cv_true - full_true).abs(),
        mc_stderr,
        degenerate_folds,
    })
}

/// Averaged sup-deviation statistic
/// `Z = (1/K) Σ_j sup_g |pseudo_risk(g, V_j) − true_risk(g)|`,
/// with the per-classifier true risks supplied by the caller (typically a
/// single frozen Monte Carlo evaluation).
pub fn z_statistic<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    masks: &MaskSequence,
    alpha: F,
    t_alpha: F,
    true_risks: &[F],
) -> Result<F> {
    if true_risks.len() != class.len() {
        return Err(Error::LengthMismatch {
            context: "true risks per classifier",
            expected: class.len(),
            got: true_risks.len(),
        });
    }
    if masks.n() != dataset.n() {
        return Err(Error::LengthMismatch {
            context: "mask sequence vs dataset size",
            expected: dataset.n(),
            got: masks.n(),
        });
    }
    let mut sum = F::zero();
    for j in 0..masks.k() {
        let val = masks.validation_set(j);
        let mut sup = F::zero();
        for g in class.iter() {
            let pseudo = pseudo_empirical_risk(g, cost, dataset, val, t_alpha, alpha)?;
            sup = sup.max((pseudo - true_risks[g.id]).abs());
        }
        sum = sum + sup;
    }
    Ok(sum / F::of_usize(masks.k()))
}

/// Normalized count of exceedance mismatches between the empirical and true
/// thresholds:
/// `(1/(n·alpha)) Σ_i |1{‖X_i‖ > empirical} − 1{‖X_i‖ ≥ t_alpha}|`.
/// The threshold-estimation gap of the decomposition never exceeds this.
pub fn exceedance_mismatch_sum<F: Real>(
    dataset: &Dataset<F>,
    empirical: &TailThreshold<F>,
    t_alpha: F,
    alpha: F,
) -> F {
    let mut count = 0usize;
    for &v in dataset.norms() {
        let emp = v > empirical.value;
        let tru = v >= t_alpha;
        if emp != tru {
            count += 1;
        }
    }
    F::of_usize(count) / (F::of_usize(dataset.n()) * alpha)
}

//! Validation-set sequences for cross-validation and exact verification of
//! their balance identities.
//!
//! A scheme is *balanced* when every validation set has the same
//! cardinality `n_V` and every index appears at the same frequency:
//! `(1/K) Σ_j 1{l ∈ V_j} = n_V / n` for all `l`. The built-in schemes
//! (K-fold, leave-one-out, exhaustive leave-p-out, and the blocked random
//! leave-p-out sampler) all satisfy the identity exactly, and the
//! verification here runs in integer/rational arithmetic so "exactly" means
//! residual zero, not residual below a float tolerance.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// How a mask sequence was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MaskScheme {
    KFold {
        k: usize,
    },
    Loo,
    LpoExact {
        p: usize,
    },
    LpoBalancedSample {
        p: usize,
        rounds: usize,
    },
    /// Hand-built sets; no balance guarantee.
    Custom,
}

impl std::fmt::Display for MaskScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaskScheme::KFold { k } => write!(f, "kfold:{k}"),
            MaskScheme::Loo => write!(f, "loo"),
            MaskScheme::LpoExact { p } => write!(f, "lpo_exact:{p}"),
            MaskScheme::LpoBalancedSample { p, rounds } => {
                write!(f, "lpo_balanced:{p}x{rounds}")
            }
            MaskScheme::Custom => write!(f, "custom"),
        }
    }
}

/// A sequence of validation sets `V_1..V_K` over `{0..n−1}`. Training sets
/// are the complements `T_j = {0..n−1} \ V_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSequence {
    n: usize,
    scheme: MaskScheme,
    #[serde(rename = "n_V")]
    n_v: usize,
    validation_sets: Vec<Vec<usize>>,
}

impl MaskSequence {
    /// Build from explicit validation sets. Indices are sorted and must be
    /// in range and duplicate-free; cardinalities may differ (the balance
    /// report will flag that).
    pub fn from_validation_sets(
        n: usize,
        mut validation_sets: Vec<Vec<usize>>,
        scheme: MaskScheme,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("mask sequence needs n >= 1"));
        }
        if validation_sets.is_empty() {
            return Err(Error::EmptySubset {
                context: "mask sequence with no validation sets",
            });
        }
        for set in &mut validation_sets {
            if set.is_empty() {
                return Err(Error::EmptySubset {
                    context: "empty validation set",
                });
            }
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid("validation set contains duplicate indices"));
            }
            if *set.last().unwrap() >= n {
                return Err(Error::invalid(format!(
                    "validation index {} out of range for n={n}",
                    set.last().unwrap()
                )));
            }
        }
        let n_v = validation_sets[0].len();
        Ok(MaskSequence {
            n,
            scheme,
            n_v,
            validation_sets,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of masks `K`.
    pub fn k(&self) -> usize {
        self.validation_sets.len()
    }

    /// Common validation cardinality (of the first set if they differ).
    pub fn n_v(&self) -> usize {
        self.n_v
    }

    /// Training cardinality `n − n_V`.
    pub fn n_t(&self) -> usize {
        self.n - self.n_v
    }

    pub fn scheme(&self) -> MaskScheme {
        self.scheme
    }

    pub fn validation_sets(&self) -> &[Vec<usize>] {
        &self.validation_sets
    }

    pub fn validation_set(&self, j: usize) -> &[usize] {
        &self.validation_sets[j]
    }

    /// Sorted complement of `V_j`.
    pub fn training_set(&self, j: usize) -> Vec<usize> {
        let v = &self.validation_sets[j];
        let mut in_v = vec![false; self.n];
        for &i in v {
            in_v[i] = true;
        }
        (0..self.n).filter(|&i| !in_v[i]).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let seq: MaskSequence = serde_json::from_str(s)?;
        // Re-validate: the wire format is not trusted.
        MaskSequence::from_validation_sets(seq.n, seq.validation_sets, seq.scheme)
    }
}

fn identity_or_permutation(n: usize, permutation: Option<&[usize]>) -> Result<Vec<usize>> {
    match permutation {
        None => Ok((0..n).collect()),
        Some(perm) => {
            if perm.len() != n {
                return Err(Error::LengthMismatch {
                    context: "permutation length",
                    expected: n,
                    got: perm.len(),
                });
            }
            let mut seen = vec![false; n];
            for &i in perm {
                if i >= n || seen[i] {
                    return Err(Error::invalid("not a permutation of 0..n"));
                }
                seen[i] = true;
            }
            Ok(perm.to_vec())
        }
    }
}

fn blocks_of(
    order: &[usize],
    block_size: usize,
    scheme: MaskScheme,
    n: usize,
) -> Result<MaskSequence> {
    let sets: Vec<Vec<usize>> = order.chunks(block_size).map(|c| c.to_vec()).collect();
    MaskSequence::from_validation_sets(n, sets, scheme)
}

/// K disjoint contiguous blocks of size `n/K` taken from the (optionally
/// permuted) index order. Requires `K ≥ 2` and `K | n`.
pub fn kfold_masks(n: usize, k: usize, permutation: Option<&[usize]>) -> Result<MaskSequence> {
    if k < 2 {
        return Err(Error::invalid(format!("K-fold needs K >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "K-fold needs K <= n, got K={k}, n={n}"
        )));
    }
    if !n.is_multiple_of(k) {
        return Err(Error::Indivisible {
            what: "K-fold fold count K",
            divisor: k,
            n,
        });
    }
    let order = identity_or_permutation(n, permutation)?;
    blocks_of(&order, n / k, MaskScheme::KFold { k }, n)
}

/// Leave-one-out: the K-fold scheme with `K = n`. `n = 1` yields the single
/// degenerate mask `{0}` (its training set is empty).
pub fn loo_masks(n: usize) -> Result<MaskSequence> {
    if n == 0 {
        return Err(Error::invalid("leave-one-out needs n >= 1"));
    }
    let order: Vec<usize> = (0..n).collect();
    blocks_of(&order, 1, MaskScheme::Loo, n)
}

/// Binomial coefficient, saturating at `u128::MAX`.
fn binomial(n: usize, p: usize) -> u128 {
    if p > n {
        return 0;
    }
    let p = p.min(n - p);
    let mut acc: u128 = 1;
    for i in 0..p {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `C(n,p)` subsets of size `p` in lexicographic order. Refuses to
/// enumerate more than `cap` masks; the balanced sampler is the intended
/// fallback at that scale.
pub fn lpo_masks_exact(n: usize, p: usize, cap: usize) -> Result<MaskSequence> {
    if p == 0 || p >= n {
        return Err(Error::invalid(format!(
            "leave-p-out needs 1 <= p < n, got p={p}, n={n}"
        )));
    }
    let count = binomial(n, p);
    if count > cap as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: cap as u128,
        });
    }
    let mut sets = Vec::with_capacity(count as usize);
    let mut subset: Vec<usize> = (0..p).collect();
    loop {
        sets.push(subset.clone());
        // Advance to the next p-subset in lexicographic order.
        let mut i = p;
        loop {
            if i == 0 {
                return MaskSequence::from_validation_sets(n, sets, MaskScheme::LpoExact { p });
            }
            i -= 1;
            if subset[i] != i + n - p {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..p {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Blocked random leave-p-out: each round permutes `{0..n−1}` and cuts it
/// into `n/p` disjoint blocks of size `p`, so every index appears exactly
/// `rounds` times and the balance identity holds exactly. Requires `p | n`.
pub fn lpo_masks_balanced(
    n: usize,
    p: usize,
    rounds: usize,
    rng_seed: u64,
) -> Result<MaskSequence> {
    if p == 0 || p >= n {
        return Err(Error::invalid(format!(
            "leave-p-out needs 1 <= p < n, got p={p}, n={n}"
        )));
    }
    if !n.is_multiple_of(p) {
        return Err(Error::Indivisible {
            what: "balanced leave-p-out block size p",
            divisor: p,
            n,
        });
    }
    if rounds == 0 {
        return Err(Error::invalid("balanced leave-p-out needs rounds >= 1"));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut sets = Vec::with_capacity(rounds * n / p);
    for _ in 0..rounds {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for chunk in order.chunks(p) {
            sets.push(chunk.to_vec());
        }
    }
    MaskSequence::from_validation_sets(n, sets, MaskScheme::LpoBalancedSample { p, rounds })
}

/// Exact-arithmetic balance report for a mask sequence.
#[derive(Debug, Clone)]
pub struct BalanceReport {
    /// All validation (resp. training) sets share one cardinality.
    pub uniform_cardinality: bool,
    /// Per-index residual of the balance identity, as exact rationals.
    pub residuals: Vec<Rational64>,
    pub max_abs_residual: Rational64,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.uniform_cardinality && self.max_abs_residual.is_zero()
    }

    /// Serializable digest; the residual is kept as an exact `p/q` string.
    pub fn summary(&self) -> BalanceSummary {
        BalanceSummary {
            balanced: self.is_balanced(),
            uniform_cardinality: self.uniform_cardinality,
            max_abs_residual: self.max_abs_residual.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceSummary {
    pub balanced: bool,
    pub uniform_cardinality: bool,
    pub max_abs_residual: String,
}

/// Residuals of the validation balance identity,
/// `r_l = (1/K) Σ_j 1{l ∈ V_j} − n_V/n`.
pub fn verify_validation_balance(masks: &MaskSequence) -> BalanceReport {
    let n = masks.n();
    let k = masks.k() as i64;
    let mut counts = vec![0i64; n];
    for set in masks.validation_sets() {
        for &i in set {
            counts[i] += 1;
        }
    }
    let uniform = masks
        .validation_sets()
        .iter()
        .all(|s| s.len() == masks.n_v());
    let target = Rational64::new(masks.n_v() as i64, n as i64);
    report_from_counts(&counts, k, target, uniform)
}

/// Residuals of the training balance identity,
/// `r_l = (1/K) Σ_j 1{l ∈ T_j}/n_T − 1/n`.
pub fn verify_training_balance(masks: &MaskSequence) -> BalanceReport {
    let n = masks.n();
    let k = masks.k() as i64;
    let n_t = masks.n_t();
    let mut counts = vec![0i64; n];
    let mut uniform = true;
    for j in 0..masks.k() {
        let t = masks.training_set(j);
        uniform &= t.len() == n_t;
        for &i in &t {
            counts[i] += 1;
        }
    }
    if n_t == 0 {
        // Degenerate single-mask LOO with n = 1: no training identity to check.
        let residuals = vec![Rational64::zero(); n];
        return BalanceReport {
            uniform_cardinality: uniform,
            residuals,
            max_abs_residual: Rational64::zero(),
        };
    }
    let target = Rational64::new(1, n as i64);
    let residuals: Vec<Rational64> = counts
        .iter()
        .map(|&c| Rational64::new(c, k * n_t as i64) - target)
        .collect();
    finish_report(residuals, uniform)
}

fn report_from_counts(counts: &[i64], k: i64, target: Rational64, uniform: bool) -> BalanceReport {
    let residuals: Vec<Rational64> = counts
        .iter()
        .map(|&c| Rational64::new(c, k) - target)
        .collect();
    finish_report(residuals, uniform)
}

fn finish_report(residuals: Vec<Rational64>, uniform: bool) -> BalanceReport {
    let max_abs_residual = residuals
        .iter()
        .map(|r| r.abs())
        .max()
        .unwrap_or_else(Rational64::zero);
    BalanceReport {
        uniform_cardinality: uniform,
        residuals,
        max_abs_residual,
    }
}

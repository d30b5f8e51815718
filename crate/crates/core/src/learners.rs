//! Finite hypothesis classes of angular halfspace classifiers, bounded
//! cost functions, and exact empirical risk minimization on tail
//! subsamples.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, LabeledPoint, TailThreshold};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Halfspace acting on the direction of the covariate only:
/// predicts +1 iff `⟨w, x/‖x‖₂⟩ > b` with `‖w‖₂ = 1` and `b ∈ [−1, 1]`.
///
/// Because the input enters through `x/‖x‖₂`, predictions are invariant
/// under positive scaling of `x`, which is what makes the class meaningful
/// on tail regions selected by the norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier<F> {
    pub id: usize,
    pub direction: Vec<F>,
    pub offset: F,
}

impl<F: Real> Classifier<F> {
    pub fn new(id: usize, direction: Vec<F>, offset: F) -> Result<Self> {
        if direction.is_empty() {
            return Err(Error::invalid("classifier direction must be non-empty"));
        }
        let norm = direction.iter().map(|v| *v * *v).sum::<F>().sqrt();
        if (norm - F::one()).abs() > F::of(1e-6) {
            return Err(Error::invalid(
                "classifier direction must have unit L2 norm",
            ));
        }
        if offset.abs() > F::one() {
            return Err(Error::invalid("classifier offset must lie in [-1, 1]"));
        }
        Ok(Classifier {
            id,
            direction,
            offset,
        })
    }

    /// Angular score `⟨w, x/‖x‖₂⟩`; zero for the zero vector.
    pub fn score(&self, x: &[F]) -> F {
        let norm = x.iter().map(|v| *v * *v).sum::<F>().sqrt();
        if norm == F::zero() {
            return F::zero();
        }
        self.direction
            .iter()
            .zip(x)
            .map(|(w, v)| *w * *v)
            .sum::<F>()
            / norm
    }

    pub fn predict(&self, x: &[F]) -> Label {
        if self.score(x) > self.offset {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

/// A finite indexed family of classifiers plus a complexity proxy used by
/// the bound evaluators.
///
/// The proxy defaults to `ceil(log2 |G|)`, a valid VC upper bound for a
/// finite class; callers with sharper knowledge can override it.
///
/// Serializes as `{kind, directions, offsets, vc_proxy}` with the i-th
/// direction/offset pair forming classifier i.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    try_from = "HypothesisClassWire<F>",
    into = "HypothesisClassWire<F>",
    bound(serialize = "F: Real", deserialize = "F: Real")
)]
pub struct HypothesisClass<F> {
    classifiers: Vec<Classifier<F>>,
    vc_proxy: f64,
}

#[derive(Serialize, Deserialize)]
struct HypothesisClassWire<F> {
    kind: String,
    directions: Vec<Vec<F>>,
    offsets: Vec<F>,
    vc_proxy: f64,
}

impl<F: Real> From<HypothesisClass<F>> for HypothesisClassWire<F> {
    fn from(class: HypothesisClass<F>) -> Self {
        HypothesisClassWire {
            kind: "angular_halfspace".to_string(),
            directions: class
                .classifiers
                .iter()
                .map(|g| g.direction.clone())
                .collect(),
            offsets: class.classifiers.iter().map(|g| g.offset).collect(),
            vc_proxy: class.vc_proxy,
        }
    }
}

impl<F: Real> TryFrom<HypothesisClassWire<F>> for HypothesisClass<F> {
    type Error = Error;

    fn try_from(wire: HypothesisClassWire<F>) -> Result<Self> {
        if wire.kind != "angular_halfspace" {
            return Err(Error::invalid(format!(
                "unknown classifier kind {:?}",
                wire.kind
            )));
        }
        if wire.directions.len() != wire.offsets.len() {
            return Err(Error::LengthMismatch {
                context: "hypothesis class directions vs offsets",
                expected: wire.directions.len(),
                got: wire.offsets.len(),
            });
        }
        let classifiers = wire
            .directions
            .into_iter()
            .zip(wire.offsets)
            .enumerate()
            .map(|(id, (direction, offset))| Classifier::new(id, direction, offset))
            .collect::<Result<Vec<_>>>()?;
        HypothesisClass::new(classifiers, Some(wire.vc_proxy))
    }
}

impl<F: Real> HypothesisClass<F> {
    pub fn new(classifiers: Vec<Classifier<F>>, vc_proxy: Option<f64>) -> Result<Self> {
        if classifiers.is_empty() {
            return Err(Error::EmptySubset {
                context: "hypothesis class",
            });
        }
        for (i, g) in classifiers.iter().enumerate() {
            if g.id != i {
                return Err(Error::invalid(format!(
                    "classifier ids must be 0..len-1 in order, found id {} at position {i}",
                    g.id
                )));
            }
        }
        let vc_proxy = vc_proxy.unwrap_or_else(|| default_vc_proxy(classifiers.len()));
        if !vc_proxy.is_finite() || vc_proxy < 0.0 {
            return Err(Error::invalid("vc proxy must be finite and non-negative"));
        }
        Ok(HypothesisClass {
            classifiers,
            vc_proxy,
        })
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    pub fn get(&self, id: usize) -> &Classifier<F> {
        &self.classifiers[id]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Classifier<F>> {
        self.classifiers.iter()
    }

    pub fn vc_proxy(&self) -> f64 {
        self.vc_proxy
    }
}

pub fn default_vc_proxy(class_size: usize) -> f64 {
    (class_size as f64).log2().ceil()
}

/// A cost bounded in `[0, 1]`, per the normalized-cost assumption behind
/// every bound in this crate.
pub trait Cost<F: Real>: Sync {
    fn cost(&self, g: &Classifier<F>, point: &LabeledPoint<F>) -> F;
}

/// Misclassification cost `1{g(x) ≠ y}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HammingCost;

impl<F: Real> Cost<F> for HammingCost {
    fn cost(&self, g: &Classifier<F>, point: &LabeledPoint<F>) -> F {
        if g.predict(&point.x) == point.y {
            F::zero()
        } else {
            F::one()
        }
    }
}

/// Grid of `n_directions × |offsets|` angular halfspaces: directions drawn
/// uniformly on the unit sphere from `rng_seed`, crossed with the given
/// offsets. Classifier `i * |offsets| + j` pairs direction `i` with offset
/// `j`.
pub fn build_angular_grid<F: Real>(
    d: usize,
    n_directions: usize,
    offsets: &[F],
    rng_seed: u64,
) -> Result<HypothesisClass<F>> {
    if d < 2 {
        return Err(Error::invalid("angular grid needs dimension d >= 2"));
    }
    if n_directions == 0 {
        return Err(Error::invalid("angular grid needs at least one direction"));
    }
    if offsets.is_empty() {
        return Err(Error::EmptySubset {
            context: "angular grid offsets",
        });
    }
    if offsets.iter().any(|b| b.abs() > F::one()) {
        return Err(Error::invalid("offsets must lie in [-1, 1]"));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut classifiers = Vec::with_capacity(n_directions * offsets.len());
    for _ in 0..n_directions {
        let dir = loop {
            let raw: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break raw.iter().map(|v| F::of(v / norm)).collect::<Vec<F>>();
            }
        };
        for &b in offsets {
            let id = classifiers.len();
            classifiers.push(Classifier {
                id,
                direction: dir.clone(),
                offset: b,
            });
        }
    }
    HypothesisClass::new(classifiers, None)
}

/// Result of exact empirical risk minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmFit<F> {
    pub classifier_id: usize,
    pub risk: F,
    /// No point of the training subset exceeded the threshold: every
    /// classifier had risk zero and classifier 0 was returned by the
    /// lowest-id tie-break.
    pub degenerate: bool,
}

/// Exact minimizer of the empirical tail risk over the whole class, by
/// enumeration; ties go to the lowest classifier id.
pub fn erm<F: Real, C: Cost<F>>(
    class: &HypothesisClass<F>,
    cost: &C,
    dataset: &Dataset<F>,
    subset: &[usize],
    alpha: F,
    threshold: &TailThreshold<F>,
) -> Result<ErmFit<F>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset {
            context: "erm training subset",
        });
    }
    let mut best_id = 0usize;
    let mut best_risk = F::infinity();
    for g in class.iter() {
        let r = crate::risk::empirical_tail_risk(g, cost, dataset, subset, threshold, alpha)?;
        if r < best_risk {
            best_risk = r;
            best_id = g.id;
        }
    }
    let degenerate = !subset.iter().any(|&i| dataset.norm(i) > threshold.value);
    Ok(ErmFit {
        classifier_id: best_id,
        risk: best_risk,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{NormKind, ThresholdSource};

    fn unit2(x: f64, y: f64) -> Vec<f64> {
        let n = (x * x + y * y).sqrt();
        vec![x / n, y / n]
    }

    fn point(x: Vec<f64>, y: i8) -> LabeledPoint<f64> {
        LabeledPoint::new(x, Label::from_i8(y).unwrap())
    }

    #[test]
    fn grid_sizes_and_vc_proxy() {
        let g4 = build_angular_grid::<f64>(2, 4, &[0.0], 1).unwrap();
        assert_eq!(g4.len(), 4);
        assert_eq!(g4.vc_proxy(), 2.0);

        let g24 = build_angular_grid::<f64>(3, 8, &[-0.5, 0.0, 0.5], 2).unwrap();
        assert_eq!(g24.len(), 24);
        assert_eq!(g24.vc_proxy(), 5.0);

        assert!(build_angular_grid::<f64>(2, 4, &[], 1).is_err());
    }

    #[test]
    fn grid_directions_are_unit_and_ids_ordered() {
        let class = build_angular_grid::<f64>(3, 5, &[-0.25, 0.25], 9).unwrap();
        for (i, g) in class.iter().enumerate() {
            assert_eq!(g.id, i);
            let norm: f64 = g.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn halfspace_predicts_sign_of_first_angular_coordinate() {
        let g = Classifier::new(0, vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(g.predict(&[3.0, 1.0]), Label::Pos);
        assert_eq!(g.predict(&[-0.2, 5.0]), Label::Neg);
        // Scaling does not change the prediction.
        assert_eq!(g.predict(&[300.0, 100.0]), Label::Pos);
    }

    #[test]
    fn singleton_class_erm_returns_it() {
        let class = HypothesisClass::new(
            vec![Classifier::new(0, unit2(1.0, 0.0), 0.0).unwrap()],
            None,
        )
        .unwrap();
        let ds = Dataset::new(
            vec![point(vec![2.0, 0.0], 1), point(vec![0.0, 2.0], -1)],
            NormKind::L2,
        )
        .unwrap();
        let thr = TailThreshold::true_quantile(1.0, 0.5);
        let fit = erm(&class, &HammingCost, &ds, &[0, 1], 0.5, &thr).unwrap();
        assert_eq!(fit.classifier_id, 0);
        assert!(!fit.degenerate);
    }

    #[test]
    fn erm_picks_lower_risk_classifier() {
        // Hand computation on a 4-point tail, alpha = 1, all norms above the
        // threshold, so each error costs 1/4.
        //   id 0, sign of first angular coordinate:  preds +,+,-,+  (2 errors, risk 0.50)
        //   id 1, sign of second angular coordinate: preds +,+,-,-  (1 error,  risk 0.25)
        let ds = Dataset::new(
            vec![
                point(vec![1.0, 5.0], 1),
                point(vec![5.0, 1.0], -1),
                point(vec![-5.0, -1.0], -1),
                point(vec![1.0, -5.0], -1),
            ],
            NormKind::L2,
        )
        .unwrap();
        let thr = TailThreshold {
            value: 1.0,
            rank_k: None,
            source: ThresholdSource::TrueQuantile,
            alpha: 1.0,
        };
        let g0 = Classifier::new(0, unit2(1.0, 0.0), 0.0).unwrap();
        let g1 = Classifier::new(1, unit2(0.0, 1.0), 0.0).unwrap();
        let class = HypothesisClass::new(vec![g0, g1], None).unwrap();
        let fit = erm(&class, &HammingCost, &ds, &[0, 1, 2, 3], 1.0, &thr).unwrap();
        assert_eq!(fit.classifier_id, 1);
        assert!((fit.risk - 0.25).abs() < 1e-15);
    }

    #[test]
    fn erm_breaks_ties_by_lowest_id() {
        // Two copies of the same rule tie exactly; id 0 must win.
        let ds = Dataset::new(
            vec![point(vec![2.0, 0.0], 1), point(vec![-2.0, 0.0], 1)],
            NormKind::L2,
        )
        .unwrap();
        let thr = TailThreshold::true_quantile(1.0, 1.0);
        let g0 = Classifier::new(0, unit2(1.0, 0.0), 0.0).unwrap();
        let g1 = Classifier::new(1, unit2(1.0, 0.0), 0.0).unwrap();
        let class = HypothesisClass::new(vec![g0, g1], None).unwrap();
        let fit = erm(&class, &HammingCost, &ds, &[0, 1], 1.0, &thr).unwrap();
        assert_eq!(fit.classifier_id, 0);
    }

    #[test]
    fn erm_degenerate_when_no_exceedance() {
        let class = build_angular_grid::<f64>(2, 3, &[0.0], 4).unwrap();
        let ds = Dataset::new(
            vec![point(vec![0.5, 0.0], 1), point(vec![0.0, 0.5], -1)],
            NormKind::L2,
        )
        .unwrap();
        let thr = TailThreshold::true_quantile(10.0, 0.5);
        let fit = erm(&class, &HammingCost, &ds, &[0, 1], 0.5, &thr).unwrap();
        assert_eq!(fit.classifier_id, 0);
        assert_eq!(fit.risk, 0.0);
        assert!(fit.degenerate);
    }

    #[test]
    fn erm_risk_lower_bounds_whole_class() {
        let class = build_angular_grid::<f64>(2, 6, &[-0.5, 0.0, 0.5], 21).unwrap();
        let mut rng = crate::rng::rng_from_seed(8);
        let pts: Vec<LabeledPoint<f64>> = (0..30)
            .map(|_| {
                use rand::Rng;
                let x = vec![
                    rng.random::<f64>() * 4.0 - 2.0,
                    rng.random::<f64>() * 4.0 - 2.0,
                ];
                let y = if rng.random::<bool>() { 1 } else { -1 };
                point(x, y)
            })
            .collect();
        let ds = Dataset::new(pts, NormKind::L2).unwrap();
        let all: Vec<usize> = (0..30).collect();
        let thr = crate::data::order_stat_threshold(&ds, 0.3).unwrap();
        let fit = erm(&class, &HammingCost, &ds, &all, 0.3, &thr).unwrap();
        for g in class.iter() {
            let r =
                crate::risk::empirical_tail_risk(g, &HammingCost, &ds, &all, &thr, 0.3).unwrap();
            assert!(fit.risk <= r);
            if g.id == fit.classifier_id {
                assert_eq!(fit.risk, r);
            }
        }
    }

    #[test]
    fn class_json_uses_parallel_direction_offset_arrays() {
        let class = build_angular_grid::<f64>(2, 2, &[0.0, 0.5], 30).unwrap();
        let json = serde_json::to_string(&class).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["kind"], "angular_halfspace");
        assert_eq!(parsed["directions"].as_array().unwrap().len(), 4);
        assert_eq!(parsed["offsets"].as_array().unwrap().len(), 4);
        assert_eq!(parsed["vc_proxy"], 2.0);
        let back: HypothesisClass<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), class.len());
        for (a, b) in back.iter().zip(class.iter()) {
            assert_eq!(a.direction, b.direction);
            assert_eq!(a.offset, b.offset);
        }
    }

    #[test]
    fn erm_rejects_empty_subset() {
        let class = build_angular_grid::<f64>(2, 2, &[0.0], 4).unwrap();
        let ds = Dataset::new(vec![point(vec![1.0, 0.0], 1)], NormKind::L2).unwrap();
        let thr = TailThreshold::true_quantile(0.5, 0.5);
        assert!(matches!(
            erm(&class, &HammingCost, &ds, &[], 0.5, &thr),
            Err(Error::EmptySubset { .. })
        ));
    }
}

//! Datasets, norms, tail-order-statistic thresholds and exceedance
//! indicators — the substrate shared by every estimator.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Binary label, stored as ±1 on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }

    pub fn from_i8(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Label::Neg),
            1 => Ok(Label::Pos),
            other => Err(Error::invalid(format!(
                "label must be -1 or +1, got {other}"
            ))),
        }
    }
}

/// One observation: covariate vector plus binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint<F> {
    pub x: Vec<F>,
    pub y: Label,
}

impl<F: Real> LabeledPoint<F> {
    pub fn new(x: Vec<F>, y: Label) -> Self {
        LabeledPoint { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// The (semi-)norm applied to covariates when measuring tail exceedance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn eval<F: Real>(self, x: &[F]) -> F {
        match self {
            NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
            NormKind::L2 => x.iter().map(|v| *v * *v).sum::<F>().sqrt(),
            NormKind::Linf => x.iter().fold(F::zero(), |acc, v| acc.max(v.abs())),
        }
    }
}

/// Norms of a batch of points. Fails on inconsistent dimensions or
/// non-finite entries.
pub fn compute_norms<F: Real>(points: &[LabeledPoint<F>], kind: NormKind) -> Result<Vec<F>> {
    if points.is_empty() {
        return Err(Error::EmptySubset {
            context: "compute_norms",
        });
    }
    let d = points[0].dim();
    if d == 0 {
        return Err(Error::invalid("covariate dimension must be at least 1"));
    }
    let mut norms = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
        for (j, v) in p.x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { point: i, coord: j });
            }
        }
        norms.push(kind.eval(&p.x));
    }
    Ok(norms)
}

/// Immutable sample of labeled points with cached covariate norms.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    points: Vec<LabeledPoint<F>>,
    norm_kind: NormKind,
    norms: Vec<F>,
}

impl<F: Real> Dataset<F> {
    pub fn new(points: Vec<LabeledPoint<F>>, norm_kind: NormKind) -> Result<Self> {
        let norms = compute_norms(&points, norm_kind)?;
        Ok(Dataset {
            points,
            norm_kind,
            norms,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn points(&self) -> &[LabeledPoint<F>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LabeledPoint<F> {
        &self.points[i]
    }

    pub fn norms(&self) -> &[F] {
        &self.norms
    }

    pub fn norm(&self, i: usize) -> F {
        self.norms[i]
    }

    /// CSV with header `x_1,..,x_d,y`; labels written as ±1, floats in
    /// shortest round-trip form so identical datasets serialize
    /// byte-identically.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        let d = self.dim();
        let mut header: Vec<String> = (1..=d).map(|j| format!("x_{j}")).collect();
        header.push("y".to_string());
        csv.write_record(&header)?;
        for p in &self.points {
            let mut rec: Vec<String> = p.x.iter().map(|v| format!("{v}")).collect();
            rec.push(p.y.as_i8().to_string());
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, norm_kind: NormKind) -> Result<Self> {
        let mut csv = csv::Reader::from_reader(r);
        let headers = csv.headers()?.clone();
        if headers.len() < 2 || headers.iter().next_back() != Some("y") {
            return Err(Error::invalid("dataset CSV must have columns x_1..x_d,y"));
        }
        let d = headers.len() - 1;
        let mut points = Vec::new();
        for rec in csv.records() {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(Error::DimensionMismatch {
                    expected: d + 1,
                    got: rec.len(),
                });
            }
            let mut x = Vec::with_capacity(d);
            for v in rec.iter().take(d) {
                let parsed: f64 = v
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad covariate value {v:?}")))?;
                x.push(F::of(parsed));
            }
            let y: i8 = rec[d]
                .parse()
                .map_err(|_| Error::invalid(format!("bad label value {:?}", &rec[d])))?;
            points.push(LabeledPoint::new(x, Label::from_i8(y)?));
        }
        Dataset::new(points, norm_kind)
    }

    pub fn sidecar(&self) -> DatasetSidecar {
        DatasetSidecar {
            n: self.n(),
            d: self.dim(),
            norm_kind: self.norm_kind,
        }
    }

    /// Write `<csv_path>` and the JSON sidecar `<sidecar_path>`.
    pub fn save_files(&self, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
        let csv_file = std::fs::File::create(csv_path)?;
        self.write_csv(csv_file)?;
        let json = serde_json::to_string_pretty(&self.sidecar())?;
        std::fs::write(sidecar_path, json + "\n")?;
        Ok(())
    }

    pub fn load_files(csv_path: &Path, sidecar_path: &Path) -> Result<Self> {
        let sidecar: DatasetSidecar =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        let ds = Dataset::read_csv(std::fs::File::open(csv_path)?, sidecar.norm_kind)?;
        if ds.n() != sidecar.n {
            return Err(Error::LengthMismatch {
                context: "dataset rows vs sidecar n",
                expected: sidecar.n,
                got: ds.n(),
            });
        }
        if ds.dim() != sidecar.d {
            return Err(Error::DimensionMismatch {
                expected: sidecar.d,
                got: ds.dim(),
            });
        }
        Ok(ds)
    }
}

/// JSON sidecar describing a dataset CSV.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub n: usize,
    pub d: usize,
    pub norm_kind: NormKind,
}

/// Where a tail threshold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdSource {
    /// The `floor(alpha*n)`-th largest norm of a sample.
    EmpiricalOrderStat,
    /// A known `1−alpha` quantile of the norm distribution.
    TrueQuantile,
}

/// A tail threshold together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailThreshold<F> {
    pub value: F,
    /// Rank of the defining order statistic (1 = largest); empirical only.
    pub rank_k: Option<usize>,
    pub source: ThresholdSource,
    pub alpha: F,
}

impl<F: Real> TailThreshold<F> {
    pub fn true_quantile(value: F, alpha: F) -> Self {
        TailThreshold {
            value,
            rank_k: None,
            source: ThresholdSource::TrueQuantile,
            alpha,
        }
    }
}

/// Tail rank `k = floor(alpha * n)`.
pub fn tail_rank<F: Real>(alpha: F, n: usize) -> usize {
    (alpha * F::of_usize(n)).floor().to_usize().unwrap_or(0)
}

/// The `floor(alpha*n)`-th largest norm of the dataset.
///
/// Ties are broken by sorting on (norm descending, original index
/// ascending), which makes the selected rank deterministic. Fails when
/// `floor(alpha*n) = 0`; that case must be surfaced, never defaulted.
pub fn order_stat_threshold<F: Real>(dataset: &Dataset<F>, alpha: F) -> Result<TailThreshold<F>> {
    order_stat_over(dataset.norms(), alpha, dataset.n())
}

/// Same as [`order_stat_threshold`] restricted to a subset `s`; the rank is
/// `floor(alpha * |s|)` within the subset.
pub fn order_stat_threshold_subset<F: Real>(
    dataset: &Dataset<F>,
    s: &[usize],
    alpha: F,
) -> Result<TailThreshold<F>> {
    if s.is_empty() {
        return Err(Error::EmptySubset {
            context: "order_stat_threshold_subset",
        });
    }
    let norms: Vec<F> = s.iter().map(|&i| dataset.norm(i)).collect();
    order_stat_over(&norms, alpha, s.len())
}

fn order_stat_over<F: Real>(norms: &[F], alpha: F, n: usize) -> Result<TailThreshold<F>> {
    if !(alpha > F::zero() && alpha <= F::one()) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let rank_k = tail_rank(alpha, n);
    if rank_k == 0 {
        return Err(Error::DegenerateTailRank {
            alpha: alpha.as_f64(),
            n,
        });
    }
    debug_assert!(rank_k <= n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        norms[b]
            .partial_cmp(&norms[a])
            .expect("norms are finite")
            .then(a.cmp(&b))
    });
    Ok(TailThreshold {
        value: norms[order[rank_k - 1]],
        rank_k: Some(rank_k),
        source: ThresholdSource::EmpiricalOrderStat,
        alpha,
    })
}

/// Exceedance indicators `norms[i] > value` (strict) or `norms[i] ≥ value`.
///
/// Strict comparison matches the indicator inside the empirical tail risk;
/// with an empirical rank-`k` threshold and pairwise-distinct norms it marks
/// exactly `k − 1` points, while the risk normalization is `alpha·n ≈ k`.
/// The off-by-one is inherent to the estimator's definition and is left
/// untouched; the non-strict variant is provided for callers that want all
/// `k` points.
pub fn exceedance_indicator<F: Real>(
    norms: &[F],
    threshold: &TailThreshold<F>,
    strict: bool,
) -> Vec<bool> {
    let t = threshold.value;
    norms
        .iter()
        .map(|&v| if strict { v > t } else { v >= t })
        .collect()
}

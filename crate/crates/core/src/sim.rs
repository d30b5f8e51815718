//! Heavy-tailed synthetic data with analytically known tail quantiles.
//!
//! Covariates are generated as `X = R·Θ` with a Pareto radius
//! `P(R > r) = r^(−γ)` for `r ≥ 1` (inverse CDF `R = U^(−1/γ)`), an angular
//! law on the unit sphere, and labels `Y ~ Bernoulli(η(Θ))` mapped to ±1.
//! With the L2 norm and unit-norm angles, `‖X‖₂ = R`, so the `1−α` norm
//! quantile is the closed form `t_α = α^(−1/γ)` and conditioning on
//! `‖X‖ ≥ t_α` reduces to the Pareto scaling `R = t_α·U^(−1/γ)` — exact
//! conditional draws, no rejection step.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{OpenClosed01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, LabeledPoint, NormKind};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Angular component of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularLaw<F> {
    UniformSphere,
    DiscreteAtoms { atoms: Vec<Vec<F>>, weights: Vec<F> },
}

/// Conditional label probability `η(θ) = P(Y = +1 | Θ = θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelModel<F> {
    Constant {
        q: F,
    },
    /// `1 − eps` on the side `⟨direction, θ⟩ > 0`, `eps` on the other side.
    HalfspaceNoise {
        direction: Vec<F>,
        eps: F,
    },
}

/// Full description of a synthetic source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec<F> {
    pub d: usize,
    pub gamma: F,
    pub angular: AngularLaw<F>,
    pub eta: LabelModel<F>,
    #[serde(default = "default_norm_kind")]
    pub norm_kind: NormKind,
}

fn default_norm_kind() -> NormKind {
    NormKind::L2
}

impl<F: Real> GeneratorSpec<F> {
    /// L2-norm generator; the configuration under which `‖X‖ = R` exactly.
    pub fn new(d: usize, gamma: F, angular: AngularLaw<F>, eta: LabelModel<F>) -> Result<Self> {
        let spec = GeneratorSpec {
            d,
            gamma,
            angular,
            eta,
            norm_kind: NormKind::L2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Switch the norm; only meaningful with discrete atoms of unit norm
    /// under that norm, which is re-validated.
    pub fn with_norm_kind(mut self, norm_kind: NormKind) -> Result<Self> {
        self.norm_kind = norm_kind;
        if norm_kind != NormKind::L2 && matches!(self.angular, AngularLaw::UniformSphere) {
            return Err(Error::invalid(
                "non-L2 norms require discrete atoms of unit norm; \
                 the uniform sphere only has unit L2 norm",
            ));
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::invalid("generator dimension must be >= 2"));
        }
        if !self.gamma.is_finite() || self.gamma <= F::zero() {
            return Err(Error::invalid(
                "tail index gamma must be positive and finite",
            ));
        }
        match &self.angular {
            AngularLaw::UniformSphere => {}
            AngularLaw::DiscreteAtoms { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return Err(Error::invalid(
                        "discrete atoms need matching, non-empty atom and weight lists",
                    ));
                }
                let mut total = F::zero();
                for w in weights {
                    if *w < F::zero() {
                        return Err(Error::invalid("atom weights must be non-negative"));
                    }
                    total = total + *w;
                }
                if (total - F::one()).abs() > F::of(1e-9) {
                    return Err(Error::invalid("atom weights must sum to 1"));
                }
                for atom in atoms {
                    if atom.len() != self.d {
                        return Err(Error::DimensionMismatch {
                            expected: self.d,
                            got: atom.len(),
                        });
                    }
                    let norm = self.norm_kind.eval(atom);
                    if (norm - F::one()).abs() > F::of(1e-9) {
                        return Err(Error::invalid(
                            "discrete atoms must have unit norm under the generator's norm",
                        ));
                    }
                }
            }
        }
        match &self.eta {
            LabelModel::Constant { q } => {
                if !(*q >= F::zero() && *q <= F::one()) {
                    return Err(Error::invalid(
                        "constant label probability must lie in [0,1]",
                    ));
                }
            }
            LabelModel::HalfspaceNoise { direction, eps } => {
                if direction.len() != self.d {
                    return Err(Error::DimensionMismatch {
                        expected: self.d,
                        got: direction.len(),
                    });
                }
                if !(*eps >= F::zero() && *eps <= F::of(0.5)) {
                    return Err(Error::invalid("label noise eps must lie in [0, 1/2]"));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: GeneratorSpec<F> = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Pareto inverse CDF: `U ∈ (0,1] ↦ U^(−1/γ) ∈ [1, ∞)`.
fn radius_from_uniform(gamma: f64, u: f64) -> f64 {
    u.powf(-1.0 / gamma)
}

fn draw_angle<F: Real>(spec: &GeneratorSpec<F>, rng: &mut ChaCha12Rng) -> Vec<F> {
    match &spec.angular {
        AngularLaw::UniformSphere => loop {
            let raw: Vec<f64> = (0..spec.d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return raw.iter().map(|v| F::of(v / norm)).collect();
            }
        },
        AngularLaw::DiscreteAtoms { atoms, weights } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (atom, w) in atoms.iter().zip(weights) {
                acc += w.as_f64();
                if u < acc {
                    return atom.clone();
                }
            }
            atoms.last().expect("validated non-empty").clone()
        }
    }
}

fn draw_label<F: Real>(spec: &GeneratorSpec<F>, theta: &[F], rng: &mut ChaCha12Rng) -> Label {
    let q = match &spec.eta {
        LabelModel::Constant { q } => q.as_f64(),
        LabelModel::HalfspaceNoise { direction, eps } => {
            let dot = direction
                .iter()
                .zip(theta)
                .map(|(a, b)| a.as_f64() * b.as_f64())
                .sum::<f64>();
            if dot > 0.0 {
                1.0 - eps.as_f64()
            } else {
                eps.as_f64()
            }
        }
    };
    if rng.random::<f64>() < q {
        Label::Pos
    } else {
        Label::Neg
    }
}

fn draw_point<F: Real>(
    spec: &GeneratorSpec<F>,
    radius: f64,
    rng: &mut ChaCha12Rng,
) -> LabeledPoint<F> {
    let theta = draw_angle(spec, rng);
    let x: Vec<F> = theta.iter().map(|t| *t * F::of(radius)).collect();
    let y = draw_label(spec, &theta, rng);
    LabeledPoint::new(x, y)
}

/// Draw `n` i.i.d. points from the generator.
pub fn sample<F: Real>(spec: &GeneratorSpec<F>, n: usize, rng_seed: u64) -> Result<Dataset<F>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("sample size must be >= 1"));
    }
    let mut rng = rng_from_seed(rng_seed);
    let gamma = spec.gamma.as_f64();
    let points: Vec<LabeledPoint<F>> = (0..n)
        .map(|_| {
            let u: f64 = rng.sample(OpenClosed01);
            draw_point(spec, radius_from_uniform(gamma, u), &mut rng)
        })
        .collect();
    Dataset::new(points, spec.norm_kind)
}

/// Exact `1−alpha` quantile of the covariate norm: `t_α = α^(−1/γ)`.
pub fn true_quantile<F: Real>(spec: &GeneratorSpec<F>, alpha: F) -> Result<F> {
    if !(alpha > F::zero() && alpha <= F::one()) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(F::of(radius_from_uniform(
        spec.gamma.as_f64(),
        alpha.as_f64(),
    )))
}

/// Exact draws from the law of `O` given `‖X‖ ≥ t_α`, using the Pareto
/// scaling property `R | R ≥ t ~ t·R`. Radius and angle are independent, so
/// the angular and label laws are unchanged by the conditioning.
///
/// Construction puts every radius at or above `t_α`; recomputing the norm
/// from the stored coordinates can round by an ulp.
pub fn sample_conditional<F: Real>(
    spec: &GeneratorSpec<F>,
    alpha: F,
    m: usize,
    rng_seed: u64,
) -> Result<Vec<LabeledPoint<F>>> {
    spec.validate()?;
    if m == 0 {
        return Err(Error::invalid("conditional sample size must be >= 1"));
    }
    let t_alpha = true_quantile(spec, alpha)?.as_f64();
    let mut rng = rng_from_seed(rng_seed);
    let gamma = spec.gamma.as_f64();
    Ok((0..m)
        .map(|_| {
            let u: f64 = rng.sample(OpenClosed01);
            draw_point(spec, t_alpha * radius_from_uniform(gamma, u), &mut rng)
        })
        .collect())
}

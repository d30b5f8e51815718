//! Cross-validation risk estimation on rare tail regions.
//!
//! Classification risk conditioned on a rare event of the form
//! `‖X‖ ≥ t_α`, where `t_α` is the `1−α` quantile of the covariate norm,
//! behaves differently from the usual risk: every estimator only sees the
//! roughly `k = αn` observations that land in the tail. This crate provides
//! the full tool chain for studying cross-validation in that regime:
//!
//! - [`data`] — datasets with cached norms, tail-order-statistic thresholds
//!   and exceedance indicators;
//! - [`masks`] — K-fold / leave-one-out / leave-p-out validation-set
//!   sequences with exact (rational-arithmetic) balance verification;
//! - [`learners`] — finite classes of angular halfspace classifiers and
//!   exact empirical risk minimization over them;
//! - [`risk`] — the conditional empirical risk, its fixed-threshold
//!   (pseudo) variant, Monte Carlo true risk, CV aggregates, the
//!   three-term error decomposition and the averaged sup-deviation
//!   statistic Z;
//! - [`bounds`] — closed-form evaluators and inverters for the exponential
//!   and polynomial CV deviation bounds and the Bernstein tail they rest on;
//! - [`sim`] — heavy-tailed synthetic data with Pareto radius, known tail
//!   quantiles and exact conditional sampling above `t_α`;
//! - [`harness`] — seeded, reproducible Monte Carlo experiments: per-trial
//!   exact-identity checks, deviation-rate fitting, coverage diagnostics
//!   and tail-dominance tables.
//!
//! All floating-point computation is generic over the [`scalar::Real`]
//! scalar type; the aliases below pin the common `f64` instantiations.
//! Mask balance verification deliberately avoids floating point and uses
//! exact rationals instead.

pub mod bounds;
pub mod data;
pub mod error;
pub mod harness;
pub mod learners;
pub mod masks;
pub mod risk;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the generic core types.
pub type LabeledPoint64 = data::LabeledPoint<f64>;
pub type Dataset64 = data::Dataset<f64>;
pub type TailThreshold64 = data::TailThreshold<f64>;
pub type Classifier64 = learners::Classifier<f64>;
pub type HypothesisClass64 = learners::HypothesisClass<f64>;
pub type ThresholdPolicy64 = risk::ThresholdPolicy<f64>;
pub type RiskReport64 = risk::RiskReport<f64>;
pub type BoundInputs64 = bounds::BoundInputs<f64>;
pub type BoundValue64 = bounds::BoundValue<f64>;
pub type GeneratorSpec64 = sim::GeneratorSpec<f64>;

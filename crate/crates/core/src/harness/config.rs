//! Experiment configuration: one JSON file drives every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::tail_rank;
use crate::error::{Error, Result};
use crate::learners::{build_angular_grid, HypothesisClass};
use crate::masks::{kfold_masks, loo_masks, lpo_masks_balanced, lpo_masks_exact, MaskSequence};
use crate::rng::{derive_seed, stream_rng};
use crate::sim::GeneratorSpec;

fn default_one() -> f64 {
    1.0
}

fn default_cap() -> usize {
    200_000
}

/// Finite class construction parameters; directions are drawn from the
/// master seed so the class is fixed across all trials of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassConfig {
    pub n_directions: usize,
    pub offsets: Vec<f64>,
    /// Override for the complexity proxy; defaults to `ceil(log2 |G|)`.
    #[serde(default)]
    pub vc_proxy: Option<f64>,
}

/// Cross-validation scheme selection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeConfig {
    KFold {
        k: usize,
    },
    Loo,
    LpoExact {
        p: usize,
        #[serde(default = "default_cap")]
        cap: usize,
    },
    LpoBalanced {
        p: usize,
        rounds: usize,
    },
}

/// Full experiment description. `master_seed` is mandatory: every random
/// stream in the run derives from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec<f64>,
    pub class: ClassConfig,
    pub alpha: f64,
    pub scheme: SchemeConfig,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    /// Conditional Monte Carlo sample size per trial.
    pub m: usize,
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_one")]
    pub m_const: f64,
    #[serde(default = "default_one")]
    pub m5_const: f64,
    pub master_seed: u64,
    /// Grid for the Z tail table; defaults to 0.1, 0.2, .., 1.0.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid must be non-empty"));
        }
        if self.trials_per_n == 0 {
            return Err(Error::invalid("trials_per_n must be >= 1"));
        }
        if self.m == 0 {
            return Err(Error::invalid("conditional sample size m must be >= 1"));
        }
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
            return Err(Error::invalid("delta_grid entries must lie in (0, 1]"));
        }
        if self.m_const <= 0.0 || self.m5_const <= 0.0 {
            return Err(Error::invalid("constants M and M5 must be positive"));
        }
        if self.class.n_directions == 0 || self.class.offsets.is_empty() {
            return Err(Error::invalid("class needs directions and offsets"));
        }
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() || grid.iter().any(|t| t.is_nan() || *t < 0.0) {
                return Err(Error::invalid("t_grid entries must be >= 0"));
            }
        }
        for &n in &self.n_grid {
            if tail_rank(self.alpha, n) == 0 {
                return Err(Error::DegenerateTailRank {
                    alpha: self.alpha,
                    n,
                });
            }
            match self.scheme {
                SchemeConfig::KFold { k } => {
                    if k < 2 || n % k != 0 {
                        return Err(Error::Indivisible {
                            what: "K-fold fold count K",
                            divisor: k,
                            n,
                        });
                    }
                }
                SchemeConfig::Loo => {}
                SchemeConfig::LpoExact { p, .. } => {
                    if p == 0 || p >= n {
                        return Err(Error::invalid(format!(
                            "leave-p-out needs 1 <= p < n (p={p}, n={n})"
                        )));
                    }
                }
                SchemeConfig::LpoBalanced { p, rounds } => {
                    if rounds == 0 {
                        return Err(Error::invalid("balanced leave-p-out needs rounds >= 1"));
                    }
                    if p == 0 || n % p != 0 {
                        return Err(Error::Indivisible {
                            what: "balanced leave-p-out block size p",
                            divisor: p,
                            n,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The hypothesis class of this experiment; deterministic in the master
    /// seed and shared across trials.
    pub fn build_class(&self) -> Result<HypothesisClass<f64>> {
        let seed = derive_seed(self.master_seed, "class", &[]);
        let class = build_angular_grid(
            self.generator.d,
            self.class.n_directions,
            &self.class.offsets,
            seed,
        )?;
        match self.class.vc_proxy {
            None => Ok(class),
            Some(vc) => {
                let classifiers = class.iter().cloned().collect();
                HypothesisClass::new(classifiers, Some(vc))
            }
        }
    }

    /// Mask sequence for one trial. K-fold folds are cut from a fresh
    /// random permutation per trial; exhaustive schemes are deterministic.
    pub fn masks_for(&self, n: usize, trial_index: u64) -> Result<MaskSequence> {
        match self.scheme {
            SchemeConfig::KFold { k } => {
                let mut rng = stream_rng(self.master_seed, "masks", &[n as u64, trial_index]);
                let mut perm: Vec<usize> = (0..n).collect();
                use rand::seq::SliceRandom;
                perm.shuffle(&mut rng);
                kfold_masks(n, k, Some(&perm))
            }
            SchemeConfig::Loo => loo_masks(n),
            SchemeConfig::LpoExact { p, cap } => lpo_masks_exact(n, p, cap),
            SchemeConfig::LpoBalanced { p, rounds } => {
                let seed = derive_seed(self.master_seed, "masks", &[n as u64, trial_index]);
                lpo_masks_balanced(n, p, rounds, seed)
            }
        }
    }

    pub fn t_grid_or_default(&self) -> Vec<f64> {
        self.t_grid
            .clone()
            .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect())
    }

    /// Reference delta used for the per-trial radii columns: the first grid
    /// entry.
    pub fn delta_ref(&self) -> f64 {
        self.delta_grid[0]
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sim::{AngularLaw, LabelModel};

    pub(crate) fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            generator: GeneratorSpec::new(
                3,
                2.0,
                AngularLaw::UniformSphere,
                LabelModel::HalfspaceNoise {
                    direction: vec![1.0, 0.0, 0.0],
                    eps: 0.2,
                },
            )
            .unwrap(),
            class: ClassConfig {
                n_directions: 8,
                offsets: vec![0.0, 0.3],
                vc_proxy: None,
            },
            alpha: 0.2,
            scheme: SchemeConfig::KFold { k: 5 },
            n_grid: vec![50],
            trials_per_n: 4,
            m: 2000,
            delta_grid: vec![0.05, 0.1],
            m_const: 1.0,
            m5_const: 1.0,
            master_seed: 123,
            t_grid: None,
            output_dir: None,
        }
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = small_config();
        cfg.validate().unwrap();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back.master_seed, 123);
        assert_eq!(back.m_const, 1.0);

        let mut bad = small_config();
        bad.n_grid = vec![51];
        assert!(bad.validate().is_err()); // 5 does not divide 51

        let mut bad = small_config();
        bad.alpha = 0.001;
        assert!(bad.validate().is_err()); // floor(alpha*n) = 0
    }

    #[test]
    fn class_is_deterministic_in_master_seed() {
        let cfg = small_config();
        let a = cfg.build_class().unwrap();
        let b = cfg.build_class().unwrap();
        assert_eq!(a.len(), b.len());
        for (ga, gb) in a.iter().zip(b.iter()) {
            assert_eq!(ga.direction, gb.direction);
            assert_eq!(ga.offset, gb.offset);
        }
        assert_eq!(a.vc_proxy(), 4.0); // ceil(log2 16)
    }

    #[test]
    fn masks_depend_on_trial_index() {
        let cfg = small_config();
        let a = cfg.masks_for(50, 0).unwrap();
        let b = cfg.masks_for(50, 1).unwrap();
        let a2 = cfg.masks_for(50, 0).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a, b);
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{AbcConfig, Estimator, LbkldConfig, NestedMcConfig};
use crate::models::{AphidModel, GaussianLocationModel, RickerModel, SimulationModel, ToyModel};
use crate::optimize::{DesignSpec, SpsaConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Toy {
        #[serde(default = "toy_noise")]
        noise_sd: f64,
    },
    Ricker {
        #[serde(default = "ricker_horizon")]
        horizon: usize,
        #[serde(default = "one_f")]
        initial_state: f64,
    },
    Aphid {},
    GaussianLocation {
        #[serde(default = "one_f")]
        prior_sd: f64,
        #[serde(default = "one_f")]
        noise_sd: f64,
        #[serde(default = "one_u")]
        dim: usize,
    },
}

fn toy_noise() -> f64 {
    0.05
}
fn ricker_horizon() -> usize {
    50
}
fn one_f() -> f64 {
    1.0
}
fn one_u() -> usize {
    1
}

impl ModelConfig {
    pub fn build(&self) -> Result<Box<dyn SimulationModel>> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "model.{name} must be positive, got {v}"
                )))
            }
        };
        Ok(match self {
            ModelConfig::Toy { noise_sd } => {
                positive("noise_sd", *noise_sd)?;
                Box::new(ToyModel {
                    noise_sd: *noise_sd,
                    ..Default::default()
                })
            }
            ModelConfig::Ricker {
                horizon,
                initial_state,
            } => {
                if *horizon < 7 {
                    return Err(Error::Config(format!(
                        "model.horizon must be at least 7, got {horizon}"
                    )));
                }
                positive("initial_state", *initial_state)?;
                Box::new(RickerModel {
                    horizon: *horizon,
                    initial_state: *initial_state,
                })
            }
            ModelConfig::Aphid {} => Box::new(AphidModel::default()),
            ModelConfig::GaussianLocation {
                prior_sd,
                noise_sd,
                dim,
            } => {
                positive("prior_sd", *prior_sd)?;
                positive("noise_sd", *noise_sd)?;
                if *dim == 0 {
                    return Err(Error::Config("model.dim must be at least 1".into()));
                }
                Box::new(GaussianLocationModel {
                    prior_sd: *prior_sd,
                    noise_sd: *noise_sd,
                    dim: *dim,
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorConfig {
    LbkldPartition(LbkldConfig),
    LbkldNopartition(LbkldConfig),
    NestedMcKld(NestedMcConfig),
    DPosteriorPrecision(AbcConfig),
}

impl EstimatorConfig {
    pub fn build(&self) -> Estimator {
        match self {
            EstimatorConfig::LbkldPartition(c) => Estimator::LbkldPartition(c.clone()),
            EstimatorConfig::LbkldNopartition(c) => Estimator::LbkldNoPartition(c.clone()),
            EstimatorConfig::NestedMcKld(c) => Estimator::NestedMc(c.clone()),
            EstimatorConfig::DPosteriorPrecision(c) => Estimator::DPosterior(c.clone()),
        }
    }
}

/// A complete run description, read from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub estimator: EstimatorConfig,
    pub design: DesignSpec,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the estimator block's replication count.
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub spsa: Option<SpsaConfig>,
    /// Number of inference trials for `replicate-infer`.
    #[serde(default)]
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The estimator with the top-level replication override applied.
    pub fn estimator(&self) -> Estimator {
        let e = self.estimator.build();
        match self.replications {
            Some(r) => e.with_replications(r),
            None => e,
        }
    }

    /// Check every block; nothing is simulated.
    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        self.estimator().validate()?;
        self.design.validate()?;
        match &self.design {
            DesignSpec::Point { value } => {
                model.design_from_coords(value)?;
            }
            DesignSpec::TimeBox { k, .. } if *k > crate::optimize::MAX_EXHAUSTIVE_TIMES => {}
            spec => {
                for c in spec.enumerate()? {
                    model.design_from_coords(&c)?;
                }
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

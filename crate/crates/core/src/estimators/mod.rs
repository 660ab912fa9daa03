//! Expected-utility estimators for a design.
//!
//! * [`lbkld_estimate`] / [`lbkld_nopartition`]: the entropy-based lower bound
//!   on the expected KL divergence, needing only forward simulations.
//! * [`nested_mc_kld`]: the double-loop estimator of the expected KL
//!   divergence, for models with a tractable likelihood.
//! * [`d_posterior_precision`]: `1 / det` of the rejection-ABC posterior
//!   covariance, averaged over prior-predictive datasets.
//!
//! Every estimator has a `*_many` form that evaluates a list of designs from
//! one set of simulations. Random streams are keyed by replication and sample
//! index only, so `*_many(designs)[j]` is bit-identical to the single-design
//! call on `designs[j]` with the same seed.

mod abc;
mod lbkld;
mod nested_mc;

pub use abc::{
    abc_rejection, abc_select, d_posterior_precision, d_posterior_precision_many,
    posterior_summary, replicate_inference, AbcConfig, AbcPool, InferenceStudy, InferenceTrial,
    PosteriorSummary, MIN_DETERMINANT,
};
pub use lbkld::{combine_bound, lbkld_estimate, lbkld_many, lbkld_nopartition, LbkldConfig};
pub use nested_mc::{nested_mc_kld, nested_mc_kld_many, NestedMcConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Design, SimulationModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "lbkld_partition")]
    LbkldPartition,
    #[serde(rename = "lbkld_nopartition")]
    LbkldNoPartition,
    #[serde(rename = "nested_mc_kld")]
    NestedMcKld,
    #[serde(rename = "d_posterior_precision")]
    DPosteriorPrecision,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::LbkldPartition => "lbkld_partition",
            EstimatorKind::LbkldNoPartition => "lbkld_nopartition",
            EstimatorKind::NestedMcKld => "nested_mc_kld",
            EstimatorKind::DPosteriorPrecision => "d_posterior_precision",
        }
    }
}

/// Estimated expected utility of one design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityEstimate {
    pub design: Design,
    pub kind: EstimatorKind,
    pub value: f64,
    /// Standard error over replications, or over the inner Monte-Carlo terms
    /// when only one replication was run.
    pub std_error: f64,
    /// Simulator calls consumed by this estimate.
    pub n_sims: u64,
    pub replications: usize,
    /// Per-replication values.
    #[serde(skip)]
    pub replicates: Vec<f64>,
    /// Posterior covariances whose determinant was floored (ABC only).
    #[serde(skip_serializing_if = "is_zero")]
    pub floored: usize,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

/// Estimator choice together with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    LbkldPartition(LbkldConfig),
    LbkldNoPartition(LbkldConfig),
    NestedMc(NestedMcConfig),
    DPosterior(AbcConfig),
}

impl Estimator {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            Estimator::LbkldPartition(_) => EstimatorKind::LbkldPartition,
            Estimator::LbkldNoPartition(_) => EstimatorKind::LbkldNoPartition,
            Estimator::NestedMc(_) => EstimatorKind::NestedMcKld,
            Estimator::DPosterior(_) => EstimatorKind::DPosteriorPrecision,
        }
    }

    pub fn replications(&self) -> usize {
        match self {
            Estimator::LbkldPartition(c) | Estimator::LbkldNoPartition(c) => c.replications,
            Estimator::NestedMc(c) => c.replications,
            Estimator::DPosterior(c) => c.replications,
        }
    }

    /// Same estimator with a different replication count.
    pub fn with_replications(&self, replications: usize) -> Self {
        let mut e = self.clone();
        match &mut e {
            Estimator::LbkldPartition(c) | Estimator::LbkldNoPartition(c) => {
                c.replications = replications
            }
            Estimator::NestedMc(c) => c.replications = replications,
            Estimator::DPosterior(c) => c.replications = replications,
        }
        e
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Estimator::LbkldPartition(c) => c.validate(true),
            Estimator::LbkldNoPartition(c) => c.validate(false),
            Estimator::NestedMc(c) => c.validate(),
            Estimator::DPosterior(c) => c.validate(),
        }
    }

    pub fn estimate(
        &self,
        model: &dyn SimulationModel,
        design: &Design,
        seed: u64,
    ) -> Result<UtilityEstimate> {
        Ok(self
            .estimate_many(model, std::slice::from_ref(design), seed)?
            .remove(0))
    }

    pub fn estimate_many(
        &self,
        model: &dyn SimulationModel,
        designs: &[Design],
        seed: u64,
    ) -> Result<Vec<UtilityEstimate>> {
        match self {
            Estimator::LbkldPartition(c) => lbkld_many(model, designs, c, true, seed),
            Estimator::LbkldNoPartition(c) => lbkld_many(model, designs, c, false, seed),
            Estimator::NestedMc(c) => nested_mc_kld_many(model, designs, c, seed),
            Estimator::DPosterior(c) => d_posterior_precision_many(model, designs, c, seed),
        }
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub(crate) fn check_designs(model: &dyn SimulationModel, designs: &[Design]) -> Result<()> {
    if designs.is_empty() {
        return Err(Error::Argument("no designs to evaluate".into()));
    }
    designs.iter().try_for_each(|d| model.check_design(d))
}

pub(crate) fn finite(value: f64, what: &str, design: &Design) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(format!("{what} at design {design}")))
    }
}

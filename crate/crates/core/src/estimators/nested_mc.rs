use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_designs, finite, mean_and_se, EstimatorKind, UtilityEstimate};
use crate::error::{Error, Result};
use crate::models::{Design, SimulationModel};
use crate::rng::{role, StreamKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedMcConfig {
    /// Outer joint draws.
    pub n: usize,
    /// Prior draws per evidence estimate.
    pub n_inner: usize,
    #[serde(default = "one")]
    pub replications: usize,
}

fn one() -> usize {
    1
}

impl Default for NestedMcConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            n_inner: 1_000,
            replications: 1,
        }
    }
}

impl NestedMcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n_inner == 0 || self.replications == 0 {
            return Err(Error::Config(
                "nested MC needs n, n_inner and replications >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn log_mean_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + (s / xs.len() as f64).ln()
}

/// Per-draw terms `log p(y|θ,d) − log((1/n′) Σ_j p(y|θ_j,d))` for each design.
fn replication_terms(
    model: &dyn SimulationModel,
    designs: &[Design],
    cfg: &NestedMcConfig,
    key: StreamKey,
) -> Result<Vec<Vec<f64>>> {
    let missing = || {
        Error::Capability(format!(
            "model '{}' has no tractable likelihood",
            model.name()
        ))
    };
    let per_draw = (0..cfg.n as u64)
        .into_par_iter()
        .map(|i| {
            let outer = key.at(role::OUTER, i);
            let mut rng = outer.rng();
            let theta = model.prior_sample(&mut rng);
            let ys = model.simulate_many(&theta, designs, &mut rng)?;
            let mut inner_rng = outer.child(0).rng();
            let inner: Vec<Vec<f64>> = (0..cfg.n_inner)
                .map(|_| model.prior_sample(&mut inner_rng))
                .collect();
            let mut lls = vec![0.0; cfg.n_inner];
            designs
                .iter()
                .zip(&ys)
                .map(|(d, y)| {
                    let own = model.log_likelihood(y, &theta, d).ok_or_else(missing)?;
                    for (ll, t) in lls.iter_mut().zip(&inner) {
                        *ll = model.log_likelihood(y, t, d).ok_or_else(missing)?;
                    }
                    Ok(own - log_mean_exp(&lls))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    // Transpose to design-major.
    Ok((0..designs.len())
        .map(|j| per_draw.iter().map(|t| t[j]).collect())
        .collect())
}

/// Nested Monte-Carlo expected KL divergence at every design.
pub fn nested_mc_kld_many(
    model: &dyn SimulationModel,
    designs: &[Design],
    cfg: &NestedMcConfig,
    seed: u64,
) -> Result<Vec<UtilityEstimate>> {
    cfg.validate()?;
    check_designs(model, designs)?;
    let root = StreamKey::new(seed);
    let mut reps = vec![Vec::new(); designs.len()];
    let mut within_se = vec![0.0; designs.len()];
    for r in 0..cfg.replications as u64 {
        let terms = replication_terms(model, designs, cfg, root.child(r))?;
        for (j, t) in terms.iter().enumerate() {
            let (m, se) = mean_and_se(t);
            reps[j].push(finite(m, "nested MC utility", &designs[j])?);
            within_se[j] = se;
        }
    }
    Ok(designs
        .iter()
        .zip(reps)
        .zip(within_se)
        .map(|((d, reps), within)| {
            let (value, se) = mean_and_se(&reps);
            UtilityEstimate {
                design: d.clone(),
                kind: EstimatorKind::NestedMcKld,
                value,
                std_error: if cfg.replications > 1 { se } else { within },
                n_sims: (cfg.n * cfg.replications) as u64,
                replications: cfg.replications,
                replicates: reps,
                floored: 0,
            }
        })
        .collect())
}

pub fn nested_mc_kld(
    model: &dyn SimulationModel,
    design: &Design,
    cfg: &NestedMcConfig,
    seed: u64,
) -> Result<UtilityEstimate> {
    Ok(nested_mc_kld_many(model, std::slice::from_ref(design), cfg, seed)?.remove(0))
}

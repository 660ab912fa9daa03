use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_designs, finite, mean_and_se, EstimatorKind, UtilityEstimate};
use crate::entropy::{jitter_columns, knn_entropy, SampleBatch, DEFAULT_K};
use crate::error::{Error, Result};
use crate::models::{Design, SimulationModel};
use crate::partition::{partition_prior, PartitionResult};
use crate::rng::{role, StreamKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbkldConfig {
    /// Joint prior-predictive draws per replication.
    pub n: usize,
    /// Number of prior partitions `L`.
    #[serde(default = "default_partitions")]
    pub partitions: usize,
    /// Minimum cluster size.
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_k")]
    pub k_nn: usize,
    /// Uniform jitter width applied to every output coordinate before
    /// entropy estimation. `None` uses the model's lattice spacing.
    #[serde(default)]
    pub jitter_scale: Option<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

fn default_partitions() -> usize {
    5
}
fn default_n_min() -> usize {
    10
}
fn default_k() -> usize {
    DEFAULT_K
}
fn default_replications() -> usize {
    20
}

impl Default for LbkldConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            partitions: default_partitions(),
            n_min: default_n_min(),
            k_nn: DEFAULT_K,
            jitter_scale: None,
            replications: default_replications(),
        }
    }
}

impl LbkldConfig {
    pub fn validate(&self, partitioned: bool) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.k_nn == 0 || self.n <= self.k_nn {
            return Err(Error::Config(format!(
                "n = {} must exceed k_nn = {} (k_nn >= 1)",
                self.n, self.k_nn
            )));
        }
        if let Some(s) = self.jitter_scale {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("jitter_scale {s} must be >= 0")));
            }
        }
        if partitioned {
            if self.partitions == 0 {
                return Err(Error::Config("partitions must be at least 1".into()));
            }
            if self.n < self.partitions * self.n_min {
                return Err(Error::Config(format!(
                    "n = {} < partitions * n_min = {}",
                    self.n,
                    self.partitions * self.n_min
                )));
            }
            if self.partitions > 1 && self.n_min <= self.k_nn {
                return Err(Error::Config(format!(
                    "n_min = {} must exceed k_nn = {} so every group supports an entropy estimate",
                    self.n_min, self.k_nn
                )));
            }
        }
        Ok(())
    }
}

/// `−Σ_l ω_l H_l + (dim/2) log 2 + H*`.
pub fn combine_bound(h_star: f64, weights: &[f64], group_entropies: &[f64], dim: usize) -> f64 {
    let mut conditional = 0.0;
    for (w, h) in weights.iter().zip(group_entropies) {
        conditional += w * h;
    }
    -conditional + 0.5 * dim as f64 * std::f64::consts::LN_2 + h_star
}

/// Outputs of one replication: for every draw, one row per design.
struct Replication {
    theta: SampleBatch,
    y_star: Vec<Vec<Vec<f64>>>,
    z: Vec<Vec<Vec<f64>>>,
}

fn simulate_replication(
    model: &dyn SimulationModel,
    designs: &[Design],
    n: usize,
    key: StreamKey,
) -> Result<Replication> {
    let joint = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.at(role::JOINT, i).rng();
            let theta = model.prior_sample(&mut rng);
            let ys = model.simulate_many(&theta, designs, &mut rng)?;
            Ok((theta, ys))
        })
        .collect::<Result<Vec<_>>>()?;
    let z = joint
        .par_iter()
        .enumerate()
        .map(|(i, (theta, _))| {
            let i = i as u64;
            let a = model.simulate_many(theta, designs, &mut key.at(role::PAIR_A, i).rng())?;
            let b = model.simulate_many(theta, designs, &mut key.at(role::PAIR_B, i).rng())?;
            Ok(a.iter()
                .zip(&b)
                .map(|(ya, yb)| ya.iter().zip(yb).map(|(p, q)| p - q).collect())
                .collect::<Vec<Vec<f64>>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let (thetas, y_star): (Vec<_>, Vec<_>) = joint.into_iter().unzip();
    Ok(Replication {
        theta: SampleBatch::from_rows(&thetas)?,
        y_star,
        z,
    })
}

fn design_bound(
    model: &dyn SimulationModel,
    rep: &Replication,
    j: usize,
    design: &Design,
    cfg: &LbkldConfig,
    partitioned: bool,
    key: StreamKey,
) -> Result<f64> {
    let dim = model.dim_y(design)?;
    let lattice = match cfg.jitter_scale {
        Some(s) => vec![s; dim],
        None => model.lattice(design)?,
    };
    let rows: Vec<Vec<f64>> = rep.y_star.iter().map(|ys| ys[j].clone()).collect();
    let y_star = SampleBatch::from_rows(&rows)?;
    let jittered = jitter_columns(&y_star, &lattice, &mut key.at(role::JITTER, 0).rng())?;
    let h_star = knn_entropy(&jittered, cfg.k_nn)?.value;

    let part = if partitioned {
        partition_prior(
            &rep.theta,
            &y_star,
            cfg.partitions,
            cfg.n_min,
            &mut key.child(role::PARTITION).rng(),
        )?
    } else {
        PartitionResult::single(y_star.n())
    };

    let mut group_h = Vec::with_capacity(part.groups.len());
    for (l, group) in part.groups.iter().enumerate() {
        let zs: Vec<Vec<f64>> = group.iter().map(|&i| rep.z[i][j].clone()).collect();
        let zs = SampleBatch::from_rows(&zs)?;
        let zs = jitter_columns(&zs, &lattice, &mut key.at(role::JITTER, 1 + l as u64).rng())?;
        group_h.push(knn_entropy(&zs, cfg.k_nn)?.value);
    }
    finite(
        combine_bound(h_star, &part.weights, &group_h, dim),
        "lower-bound utility",
        design,
    )
}

/// Lower-bound utility at every design, from shared simulations.
pub fn lbkld_many(
    model: &dyn SimulationModel,
    designs: &[Design],
    cfg: &LbkldConfig,
    partitioned: bool,
    seed: u64,
) -> Result<Vec<UtilityEstimate>> {
    cfg.validate(partitioned)?;
    check_designs(model, designs)?;
    let root = StreamKey::new(seed);
    let mut values = vec![Vec::with_capacity(cfg.replications); designs.len()];
    for r in 0..cfg.replications as u64 {
        let key = root.child(r);
        let rep = simulate_replication(model, designs, cfg.n, key)?;
        let us = designs
            .par_iter()
            .enumerate()
            .map(|(j, d)| design_bound(model, &rep, j, d, cfg, partitioned, key))
            .collect::<Result<Vec<_>>>()?;
        for (v, u) in values.iter_mut().zip(us) {
            v.push(u);
        }
    }
    let kind = if partitioned {
        EstimatorKind::LbkldPartition
    } else {
        EstimatorKind::LbkldNoPartition
    };
    Ok(designs
        .iter()
        .zip(values)
        .map(|(d, reps)| {
            let (value, std_error) = mean_and_se(&reps);
            UtilityEstimate {
                design: d.clone(),
                kind,
                value,
                std_error,
                n_sims: 3 * (cfg.n * cfg.replications) as u64,
                replications: cfg.replications,
                replicates: reps,
                floored: 0,
            }
        })
        .collect())
}

/// Expected lower-bound utility with prior partitioning.
pub fn lbkld_estimate(
    model: &dyn SimulationModel,
    design: &Design,
    cfg: &LbkldConfig,
    seed: u64,
) -> Result<UtilityEstimate> {
    Ok(lbkld_many(model, std::slice::from_ref(design), cfg, true, seed)?.remove(0))
}

/// Expected lower-bound utility without partitioning.
pub fn lbkld_nopartition(
    model: &dyn SimulationModel,
    design: &Design,
    cfg: &LbkldConfig,
    seed: u64,
) -> Result<UtilityEstimate> {
    Ok(lbkld_many(model, std::slice::from_ref(design), cfg, false, seed)?.remove(0))
}

//! Rejection ABC and the D-posterior precision utility.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_designs, finite, mean_and_se, EstimatorKind, UtilityEstimate};
use crate::entropy::SampleBatch;
use crate::error::{Error, Result};
use crate::models::{Design, SimulationModel};
use crate::rng::{role, StreamKey};

/// Determinants below this are floored before inversion.
pub const MIN_DETERMINANT: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcConfig {
    /// Prior-predictive pool size.
    pub n_sim: usize,
    /// Accepted draws per posterior.
    pub n_keep: usize,
    /// Synthetic observed datasets averaged over.
    #[serde(default = "default_outer")]
    pub n_outer: usize,
    /// Share one pool across all observed datasets of a replication.
    #[serde(default = "yes")]
    pub reuse_pool: bool,
    #[serde(default = "one")]
    pub replications: usize,
}

fn default_outer() -> usize {
    100
}
fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}

impl Default for AbcConfig {
    fn default() -> Self {
        Self {
            n_sim: 10_000,
            n_keep: 100,
            n_outer: default_outer(),
            reuse_pool: true,
            replications: 1,
        }
    }
}

impl AbcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_keep == 0 || self.n_keep > self.n_sim {
            return Err(Error::Config(format!(
                "n_keep = {} must be in 1..=n_sim = {}",
                self.n_keep, self.n_sim
            )));
        }
        if self.n_outer == 0 || self.replications == 0 {
            return Err(Error::Config(
                "n_outer and replications must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn sims_per_replication(&self) -> u64 {
        if self.reuse_pool {
            (self.n_sim + self.n_outer) as u64
        } else {
            (self.n_outer * (self.n_sim + 1)) as u64
        }
    }
}

/// Prior-predictive pairs `(θ, y)` at one design, with the per-coordinate
/// scaling used for distances.
#[derive(Debug, Clone)]
pub struct AbcPool {
    pub theta: SampleBatch,
    pub y: SampleBatch,
    /// `1 / sd` per output coordinate; zero for constant coordinates.
    inv_scale: Vec<f64>,
}

impl AbcPool {
    pub fn new(theta: SampleBatch, y: SampleBatch) -> Result<Self> {
        if theta.n() != y.n() || y.n() == 0 {
            return Err(Error::Argument(format!(
                "pool has {} parameter draws and {} outputs",
                theta.n(),
                y.n()
            )));
        }
        let n = y.n();
        let inv_scale = (0..y.dim())
            .map(|a| {
                let col = (0..n).map(|i| y.row(i)[a]);
                let mean = col.clone().sum::<f64>() / n as f64;
                let var = col.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n.max(2) - 1) as f64;
                if var > 0.0 {
                    1.0 / var.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            theta,
            y,
            inv_scale,
        })
    }

    /// Simulate `n_sim` prior-predictive pairs for each design; draw `j`
    /// uses stream `key.child(j)`.
    pub fn simulate(
        model: &dyn SimulationModel,
        designs: &[Design],
        n_sim: usize,
        key: StreamKey,
    ) -> Result<Vec<Self>> {
        let draws = (0..n_sim as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = key.child(j).rng();
                let theta = model.prior_sample(&mut rng);
                let ys = model.simulate_many(&theta, designs, &mut rng)?;
                Ok((theta, ys))
            })
            .collect::<Result<Vec<_>>>()?;
        let theta = SampleBatch::from_rows(&draws.iter().map(|d| d.0.clone()).collect::<Vec<_>>())?;
        (0..designs.len())
            .map(|k| {
                let ys: Vec<Vec<f64>> = draws.iter().map(|d| d.1[k].clone()).collect();
                Self::new(theta.clone(), SampleBatch::from_rows(&ys)?)
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.y.n()
    }

    pub fn is_empty(&self) -> bool {
        self.y.n() == 0
    }

    /// Standardized squared distance from pool entry `i` to `y_obs`.
    fn dist2(&self, i: usize, y_obs: &[f64]) -> f64 {
        self.y
            .row(i)
            .iter()
            .zip(y_obs)
            .zip(&self.inv_scale)
            .map(|((a, b), s)| {
                let d = (a - b) * s;
                d * d
            })
            .sum()
    }
}

/// Indices of the `n_keep` pool entries nearest `y_obs`, nearest first, ties
/// broken by index.
pub fn abc_select(pool: &AbcPool, y_obs: &[f64], n_keep: usize) -> Result<Vec<usize>> {
    if n_keep == 0 || n_keep > pool.len() {
        return Err(Error::Config(format!(
            "n_keep = {n_keep} must be in 1..={}",
            pool.len()
        )));
    }
    if y_obs.len() != pool.y.dim() {
        return Err(Error::Argument(format!(
            "observation has {} coordinates, pool has {}",
            y_obs.len(),
            pool.y.dim()
        )));
    }
    let mut d: Vec<(f64, usize)> = (0..pool.len()).map(|i| (pool.dist2(i, y_obs), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if n_keep < d.len() {
        d.select_nth_unstable_by(n_keep - 1, cmp);
        d.truncate(n_keep);
    }
    d.sort_unstable_by(cmp);
    Ok(d.into_iter().map(|(_, i)| i).collect())
}

/// Parameter draws of the `n_keep` pool entries closest to `y_obs`.
pub fn abc_rejection(pool: &AbcPool, y_obs: &[f64], n_keep: usize) -> Result<SampleBatch> {
    let keep = abc_select(pool, y_obs, n_keep)?;
    let rows: Vec<Vec<f64>> = keep.iter().map(|&i| pool.theta.row(i).to_vec()).collect();
    SampleBatch::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    /// Unbiased sample covariance.
    pub cov: DMatrix<f64>,
}

impl PosteriorSummary {
    pub fn determinant(&self) -> f64 {
        self.cov.determinant()
    }
}

fn sample_mean(samples: &SampleBatch) -> Vec<f64> {
    let mut mean = vec![0.0; samples.dim()];
    for i in 0..samples.n() {
        for (m, x) in mean.iter_mut().zip(samples.row(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= samples.n() as f64);
    mean
}

pub fn posterior_summary(samples: &SampleBatch) -> Result<PosteriorSummary> {
    let (n, p) = (samples.n(), samples.dim());
    if n < 2 {
        return Err(Error::Argument(format!(
            "posterior summary needs at least 2 samples, got {n}"
        )));
    }
    let mean = sample_mean(samples);
    let mut cov = DMatrix::zeros(p, p);
    for i in 0..n {
        let r = samples.row(i);
        for a in 0..p {
            for b in 0..=a {
                cov[(a, b)] += (r[a] - mean[a]) * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in 0..=a {
            let v = cov[(a, b)] / (n - 1) as f64;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(PosteriorSummary { mean, cov })
}

/// `(1/det Ĉ, floored)` for one accepted set.
fn precision(samples: &SampleBatch) -> Result<(f64, bool)> {
    let det = posterior_summary(samples)?.determinant();
    if det > MIN_DETERMINANT {
        Ok((1.0 / det, false))
    } else {
        Ok((1.0 / MIN_DETERMINANT, true))
    }
}

/// Expected D-posterior precision at every design.
pub fn d_posterior_precision_many(
    model: &dyn SimulationModel,
    designs: &[Design],
    cfg: &AbcConfig,
    seed: u64,
) -> Result<Vec<UtilityEstimate>> {
    cfg.validate()?;
    check_designs(model, designs)?;
    let root = StreamKey::new(seed);
    let nd = designs.len();
    let mut reps = vec![Vec::new(); nd];
    let mut within_se = vec![0.0; nd];
    let mut floored = vec![0usize; nd];
    for r in 0..cfg.replications as u64 {
        let key = root.child(r);
        let shared = if cfg.reuse_pool {
            Some(AbcPool::simulate(
                model,
                designs,
                cfg.n_sim,
                key.child(role::POOL),
            )?)
        } else {
            None
        };
        let outer = (0..cfg.n_outer as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = key.at(role::OUTER, i).rng();
                let theta = model.prior_sample(&mut rng);
                let ys = model.simulate_many(&theta, designs, &mut rng)?;
                let own;
                let pools = match &shared {
                    Some(p) => p,
                    None => {
                        own = AbcPool::simulate(
                            model,
                            designs,
                            cfg.n_sim,
                            key.at(role::POOL, i + 1),
                        )?;
                        &own
                    }
                };
                pools
                    .iter()
                    .zip(&ys)
                    .map(|(pool, y)| precision(&abc_rejection(pool, y, cfg.n_keep)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for j in 0..nd {
            let us: Vec<f64> = outer.iter().map(|o| o[j].0).collect();
            floored[j] += outer.iter().filter(|o| o[j].1).count();
            let (m, se) = mean_and_se(&us);
            reps[j].push(finite(m, "D-posterior precision", &designs[j])?);
            within_se[j] = se;
        }
    }
    Ok((0..nd)
        .map(|j| {
            let (value, se) = mean_and_se(&reps[j]);
            UtilityEstimate {
                design: designs[j].clone(),
                kind: EstimatorKind::DPosteriorPrecision,
                value,
                std_error: if cfg.replications > 1 {
                    se
                } else {
                    within_se[j]
                },
                n_sims: cfg.sims_per_replication() * cfg.replications as u64,
                replications: cfg.replications,
                replicates: reps[j].clone(),
                floored: floored[j],
            }
        })
        .collect())
}

pub fn d_posterior_precision(
    model: &dyn SimulationModel,
    design: &Design,
    cfg: &AbcConfig,
    seed: u64,
) -> Result<UtilityEstimate> {
    Ok(d_posterior_precision_many(model, std::slice::from_ref(design), cfg, seed)?.remove(0))
}

/// One simulated inference: the true parameter and the ABC posterior mean.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceTrial {
    pub theta_true: Vec<f64>,
    pub posterior_mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceStudy {
    pub design: Design,
    pub trials: Vec<InferenceTrial>,
    /// Per-coordinate mean squared error of the posterior means.
    pub mse: Vec<f64>,
}

/// Repeatedly draw `(θ_true, y)` from the joint distribution, infer `θ` by
/// rejection ABC and record the posterior mean. Trial `i` uses the same
/// `(θ_true, noise)` stream at every design.
pub fn replicate_inference(
    model: &dyn SimulationModel,
    designs: &[Design],
    cfg: &AbcConfig,
    trials: usize,
    seed: u64,
) -> Result<Vec<InferenceStudy>> {
    cfg.validate()?;
    check_designs(model, designs)?;
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let root = StreamKey::new(seed);
    let shared = if cfg.reuse_pool {
        Some(AbcPool::simulate(
            model,
            designs,
            cfg.n_sim,
            root.child(role::POOL),
        )?)
    } else {
        None
    };
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.at(role::TRIAL, i).rng();
            let theta = model.prior_sample(&mut rng);
            let ys = model.simulate_many(&theta, designs, &mut rng)?;
            let own;
            let pools = match &shared {
                Some(p) => p,
                None => {
                    own = AbcPool::simulate(model, designs, cfg.n_sim, root.at(role::POOL, i + 1))?;
                    &own
                }
            };
            let means = pools
                .iter()
                .zip(&ys)
                .map(|(pool, y)| Ok(sample_mean(&abc_rejection(pool, y, cfg.n_keep)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((theta, means))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(designs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let trials: Vec<InferenceTrial> = results
                .iter()
                .map(|(t, m)| InferenceTrial {
                    theta_true: t.clone(),
                    posterior_mean: m[j].clone(),
                })
                .collect();
            let p = model.theta_dim();
            let mse = (0..p)
                .map(|a| {
                    trials
                        .iter()
                        .map(|t| (t.posterior_mean[a] - t.theta_true[a]).powi(2))
                        .sum::<f64>()
                        / trials.len() as f64
                })
                .collect();
            InferenceStudy {
                design: d.clone(),
                trials,
                mse,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ToyModel;
    use crate::rng::StreamKey;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn batch(xs: &[f64]) -> SampleBatch {
        SampleBatch::new(xs.to_vec(), 1).unwrap()
    }

    #[test]
    fn summary_of_two_points() {
        let s = posterior_summary(&batch(&[0.0, 2.0])).unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert_eq!(s.cov[(0, 0)], 2.0);
        let s = posterior_summary(&batch(&[3.0; 5])).unwrap();
        assert_eq!(s.cov[(0, 0)], 0.0);
        assert!(posterior_summary(&batch(&[1.0])).is_err());
    }

    #[test]
    fn summary_of_standard_normal() {
        let mut rng = StreamKey::new(12).rng();
        let xs: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
        let s = posterior_summary(&SampleBatch::new(xs, 2).unwrap()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((s.cov[(a, b)] - target).abs() < 0.15);
            }
        }
    }

    #[test]
    fn exact_match_is_selected() {
        let theta = batch(&[10.0, 20.0, 30.0, 40.0]);
        let y = batch(&[0.1, 0.7, 0.3, 0.9]);
        let pool = AbcPool::new(theta, y).unwrap();
        let kept = abc_rejection(&pool, &[0.3], 1).unwrap();
        assert_eq!(kept.as_slice(), &[30.0]);
        assert!(abc_rejection(&pool, &[0.3], 5).is_err());
    }

    #[test]
    fn selection_matches_full_sort() {
        // Symmetric pool: pairs ±x around zero.
        let ys: Vec<f64> = (1..=200)
            .flat_map(|i| [i as f64 * 0.01, -(i as f64) * 0.01])
            .collect();
        let theta: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let pool = AbcPool::new(batch(&theta), batch(&ys)).unwrap();
        for keep in [1, 7, 50, 399, 400] {
            let got = abc_select(&pool, &[0.0], keep).unwrap();
            let mut all: Vec<(f64, usize)> =
                ys.iter().enumerate().map(|(i, y)| (y.abs(), i)).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<usize> = all[..keep].iter().map(|p| p.1).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn constant_coordinates_are_ignored() {
        let theta = batch(&[1.0, 2.0, 3.0]);
        let y = SampleBatch::new(vec![5.0, 0.0, 5.0, 1.0, 5.0, 2.0], 2).unwrap();
        let pool = AbcPool::new(theta, y).unwrap();
        let kept = abc_rejection(&pool, &[100.0, 2.0], 1).unwrap();
        assert_eq!(kept.as_slice(), &[3.0]);
    }

    #[test]
    fn one_parameter_precision_is_inverse_variance() {
        let s = batch(&[0.1, 0.4, 0.2, 0.9]);
        let (u, floored) = precision(&s).unwrap();
        let mean = 0.4;
        let var = [0.1f64, 0.4, 0.2, 0.9]
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / 3.0;
        assert!((u - 1.0 / var).abs() < 1e-9);
        assert!(!floored);
        let (u, floored) = precision(&batch(&[2.0; 4])).unwrap();
        assert!(floored && u == 1.0 / MIN_DETERMINANT);
    }

    #[test]
    fn accounting() {
        let m = ToyModel::default();
        let cfg = AbcConfig {
            n_sim: 300,
            n_keep: 10,
            n_outer: 7,
            ..Default::default()
        };
        let u = d_posterior_precision(&m, &Design::Scalar(5.0), &cfg, 1).unwrap();
        assert_eq!(u.n_sims, 307);
        let cfg = AbcConfig {
            reuse_pool: false,
            ..cfg
        };
        let u = d_posterior_precision(&m, &Design::Scalar(5.0), &cfg, 1).unwrap();
        assert_eq!(u.n_sims, 7 * 301);
        assert!(u.value > 0.0);
    }
}

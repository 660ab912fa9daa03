//! Nonparametric differential entropy from samples.
//!
//! The estimator is Kozachenko–Leonenko in the form
//!
//! ```text
//! Ĥ = ψ(n) − ψ(k) + log V_dim + (dim / n) Σᵢ log ρᵢ
//! ```
//!
//! where `ρᵢ` is the Euclidean distance from sample `i` to its k-th nearest
//! neighbour and `V_dim` the volume of the unit Euclidean ball.

mod kdtree;

pub use kdtree::{brute_force_neighbours, KdTree};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Default neighbour order.
pub const DEFAULT_K: usize = 3;

/// Above this dimension neighbour search falls back to a linear scan.
const MAX_KDTREE_DIM: usize = 10;

/// Relative floor on neighbour distances, scaled by the sample's widest
/// coordinate range.
const RHO_FLOOR: f64 = 1e-12;

/// `n` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    data: Vec<f64>,
    dim: usize,
}

impl SampleBatch {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("sample dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Argument(format!(
                "{} values do not form rows of length {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Argument("ragged rows".into()));
        }
        Self::new(rows.concat(), dim)
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            data: self.data.iter().map(|&x| f(x)).collect(),
            dim: self.dim,
        }
    }

    fn max_range(&self) -> f64 {
        (0..self.dim)
            .map(|a| {
                let (lo, hi) = self
                    .data
                    .iter()
                    .skip(a)
                    .step_by(self.dim)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                        (lo.min(x), hi.max(x))
                    });
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Entropy in nats.
    pub value: f64,
    pub n: usize,
    pub k: usize,
    pub dim: usize,
}

/// ψ(m) for a positive integer `m`.
pub fn digamma_int(m: usize) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    -EULER_GAMMA + (1..m).map(|j| 1.0 / j as f64).sum::<f64>()
}

/// Log-volume of the unit Euclidean ball in `dim` dimensions.
pub fn log_unit_ball_volume(dim: usize) -> f64 {
    // V₀ = 1, V₁ = 2, V_d = V_{d−2} · 2π / d.
    let mut v = if dim.is_multiple_of(2) {
        0.0
    } else {
        2f64.ln()
    };
    let mut d = if dim.is_multiple_of(2) { 2 } else { 3 };
    while d <= dim {
        v += (2.0 * std::f64::consts::PI / d as f64).ln();
        d += 2;
    }
    v
}

fn validate(samples: &SampleBatch, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Argument("neighbour order k must be positive".into()));
    }
    if samples.n() <= k {
        return Err(Error::Argument(format!(
            "need more than k = {k} samples, got {}",
            samples.n()
        )));
    }
    if samples.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("samples contain non-finite entries".into()));
    }
    Ok(())
}

/// k-th nearest-neighbour distance for every sample, self excluded.
pub fn knn_distances(samples: &SampleBatch, k: usize) -> Result<Vec<f64>> {
    validate(samples, k)?;
    let (pts, dim, n) = (samples.as_slice(), samples.dim, samples.n());
    let rho = if dim <= MAX_KDTREE_DIM {
        let tree = KdTree::new(pts, dim);
        (0..n)
            .into_par_iter()
            .map(|i| tree.kth_distance(i, k))
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| brute_force_neighbours(pts, dim, i, k)[k - 1].0)
            .collect()
    };
    Ok(rho)
}

/// Exact k-th nearest-neighbour distance of one point.
pub fn knn_query(samples: &SampleBatch, query_index: usize, k: usize) -> Result<f64> {
    validate(samples, k)?;
    if query_index >= samples.n() {
        return Err(Error::Argument(format!(
            "query index {query_index} out of range for {} points",
            samples.n()
        )));
    }
    let tree = KdTree::new(samples.as_slice(), samples.dim);
    Ok(tree.kth_distance(query_index, k))
}

/// Kozachenko–Leonenko entropy estimate in nats.
///
/// Distances are floored at `1e-12` times the widest coordinate range so
/// repeated points cannot drive the estimate to `−∞`; count data should be
/// passed through [`jitter`] first.
pub fn knn_entropy(samples: &SampleBatch, k: usize) -> Result<EntropyEstimate> {
    let rho = knn_distances(samples, k)?;
    let (n, dim) = (samples.n(), samples.dim);
    let range = samples.max_range();
    let floor = RHO_FLOOR * if range > 0.0 { range } else { 1.0 };
    let sum_log: f64 = rho.iter().map(|r| r.max(floor).ln()).sum();
    let value = digamma_int(n) - digamma_int(k)
        + log_unit_ball_volume(dim)
        + dim as f64 * sum_log / n as f64;
    Ok(EntropyEstimate { value, n, k, dim })
}

/// Add independent `Uniform(−s/2, s/2)` noise to every entry, where `s` is the
/// scale of that entry's column. A zero scale leaves the column untouched.
pub fn jitter_columns(
    samples: &SampleBatch,
    scales: &[f64],
    rng: &mut SimRng,
) -> Result<SampleBatch> {
    if scales.len() != samples.dim {
        return Err(Error::Argument(format!(
            "{} jitter scales for dimension {}",
            scales.len(),
            samples.dim
        )));
    }
    if scales.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::Argument("jitter scale must be nonnegative".into()));
    }
    let mut data = samples.data.clone();
    if scales.iter().all(|s| *s == 0.0) {
        return Ok(SampleBatch {
            data,
            dim: samples.dim,
        });
    }
    for row in data.chunks_mut(samples.dim) {
        for (x, s) in row.iter_mut().zip(scales) {
            if *s > 0.0 {
                *x += s * (rng.random::<f64>() - 0.5);
            }
        }
    }
    Ok(SampleBatch {
        data,
        dim: samples.dim,
    })
}

/// [`jitter_columns`] with one scale for every column.
pub fn jitter(samples: &SampleBatch, scale: f64, rng: &mut SimRng) -> Result<SampleBatch> {
    jitter_columns(samples, &vec![scale; samples.dim], rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn line(xs: &[f64]) -> SampleBatch {
        SampleBatch::new(xs.to_vec(), 1).unwrap()
    }

    #[test]
    fn query_on_a_line() {
        let p = line(&[0.0, 1.0, 3.0]);
        assert_eq!(knn_query(&p, 0, 1).unwrap(), 1.0);
        assert_eq!(knn_query(&p, 0, 2).unwrap(), 3.0);
        assert_eq!(knn_query(&p, 2, 1).unwrap(), 2.0);
    }

    #[test]
    fn kdtree_matches_brute_force() {
        let mut rng = StreamKey::new(21).rng();
        let pts: Vec<f64> = (0..600).map(|_| rng.sample(StandardNormal)).collect();
        let tree = KdTree::new(&pts, 3);
        for k in [1, 3, 5] {
            for i in 0..200 {
                let a = tree.neighbours(i, k);
                let b = brute_force_neighbours(&pts, 3, i, k);
                assert_eq!(a.len(), k);
                for (x, y) in a.iter().zip(&b) {
                    assert!((x.0 - y.0).abs() <= 1e-12);
                }
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn ties_broken_by_index() {
        // Four points equidistant from the origin.
        let pts = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        let tree = KdTree::new(&pts, 2);
        let nb = tree.neighbours(0, 2);
        assert_eq!(nb, vec![(1.0, 1), (1.0, 2)]);
    }

    #[test]
    fn digamma_and_volume() {
        assert!((digamma_int(1) + 0.577_215_664_901_532_9).abs() < 1e-15);
        assert!((digamma_int(3) - (1.5 - 0.577_215_664_901_532_9)).abs() < 1e-15);
        assert!((log_unit_ball_volume(1) - 2f64.ln()).abs() < 1e-15);
        assert!((log_unit_ball_volume(2) - std::f64::consts::PI.ln()).abs() < 1e-15);
        let v3 = 4.0 / 3.0 * std::f64::consts::PI;
        assert!((log_unit_ball_volume(3) - v3.ln()).abs() < 1e-14);
    }

    #[test]
    fn argument_errors() {
        assert!(knn_entropy(&line(&[0.0, 1.0, 2.0]), 3).is_err());
        assert!(knn_entropy(&line(&[0.0, f64::NAN, 2.0, 3.0, 4.0]), 1).is_err());
        assert!(knn_entropy(&line(&[0.0, 1.0]), 0).is_err());
        let mut rng = StreamKey::new(0).rng();
        assert!(jitter(&line(&[0.0]), -1.0, &mut rng).is_err());
    }

    #[test]
    fn duplicates_stay_finite() {
        let p = line(&[1.0; 50]);
        assert!(knn_entropy(&p, 3).unwrap().value.is_finite());
        let mut rng = StreamKey::new(2).rng();
        let counts: Vec<f64> = (0..500).map(|i| (i % 7) as f64).collect();
        let j = jitter(&line(&counts), 1.0, &mut rng).unwrap();
        assert!(knn_entropy(&j, 3).unwrap().value.is_finite());
    }

    #[test]
    fn zero_jitter_is_identity() {
        let p = line(&[0.5, 1.5, 2.5]);
        let mut rng = StreamKey::new(0).rng();
        assert_eq!(jitter(&p, 0.0, &mut rng).unwrap(), p);
    }

    #[test]
    fn tiny_jitter_barely_moves_uniform_estimate() {
        let mut rng = StreamKey::new(31).rng();
        let xs: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        let p = line(&xs);
        let j = jitter(&p, 1e-9, &mut rng).unwrap();
        let a = knn_entropy(&p, 3).unwrap().value;
        let b = knn_entropy(&j, 3).unwrap().value;
        assert!((a - b).abs() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn affine_invariances(seed in any::<u64>(), dim in 1usize..4, shift in -50.0f64..50.0, scale in 0.01f64..20.0) {
            let mut rng = StreamKey::new(seed).rng();
            let data: Vec<f64> = (0..300 * dim).map(|_| rng.sample(StandardNormal)).collect();
            let x = SampleBatch::new(data, dim).unwrap();
            let h = knn_entropy(&x, 3).unwrap().value;
            let neg = knn_entropy(&x.map(|v| -v), 3).unwrap().value;
            prop_assert_eq!(h, neg);
            let moved = knn_entropy(&x.map(|v| v + shift), 3).unwrap().value;
            prop_assert!((moved - h).abs() < 1e-9);
            let scaled = knn_entropy(&x.map(|v| v * scale), 3).unwrap().value;
            prop_assert!((scaled - h - dim as f64 * scale.ln()).abs() < 1e-9);
        }
    }
}

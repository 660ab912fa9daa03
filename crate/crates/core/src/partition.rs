//! Prior partitioning through size-constrained k-means on simulated outputs.
//!
//! Each Lloyd iteration assigns points to their nearest centroid, reseeds
//! empty clusters, then tops up every cluster below `n_min` by moving in the
//! outside points whose move costs least. A candidate assignment is accepted
//! only if it does not raise the within-cluster sum of squares, so the
//! objective trace is non-increasing.

use rand::Rng;

use crate::entropy::SampleBatch;
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster of each point, `0..clusters`.
    pub labels: Vec<usize>,
    /// Row-major centroids.
    pub centroids: Vec<f64>,
    /// Within-cluster sum of squares after each accepted iteration.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
}

/// A mixture decomposition of the prior sample induced by output clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    /// Group of each joint draw, `0..L`.
    pub labels: Vec<usize>,
    /// Indices of the draws in each group, ascending.
    pub groups: Vec<Vec<usize>>,
    pub counts: Vec<usize>,
    /// `counts[l] / n`.
    pub weights: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_pp(points: &SampleBatch, clusters: usize, rng: &mut SimRng) -> Vec<f64> {
    let n = points.n();
    let mut centroids = Vec::with_capacity(clusters * points.dim());
    centroids.extend_from_slice(points.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| dist2(points.row(i), &centroids[..points.dim()]))
        .collect();
    for _ in 1..clusters {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(dist2(points.row(i), &c));
        }
        centroids.extend_from_slice(&c);
    }
    centroids
}

/// Within-cluster sum of squares of `labels` about `centroids`.
pub fn within_cluster_sse(points: &SampleBatch, labels: &[usize], centroids: &[f64]) -> f64 {
    let dim = points.dim();
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| dist2(points.row(i), &centroids[l * dim..(l + 1) * dim]))
        .sum()
}

fn nearest(point: &[f64], centroids: &[f64], dim: usize) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (l, c) in centroids.chunks(dim).enumerate() {
        let d = dist2(point, c);
        if d < best_d {
            best_d = d;
            best = l;
        }
    }
    best
}

/// Nearest-centroid assignment followed by empty-cluster and minimum-size
/// repair. `centroids` may be modified by the empty-cluster reseed.
fn constrained_assign(points: &SampleBatch, centroids: &mut [f64], n_min: usize) -> Vec<usize> {
    let dim = points.dim();
    let clusters = centroids.len() / dim;
    let n = points.n();
    let mut labels: Vec<usize> = (0..n)
        .map(|i| nearest(points.row(i), centroids, dim))
        .collect();
    let mut sizes = vec![0usize; clusters];
    for &l in &labels {
        sizes[l] += 1;
    }

    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let far = (0..n)
            .filter(|&i| sizes[labels[i]] > 1)
            .map(|i| {
                let l = labels[i];
                (dist2(points.row(i), &centroids[l * dim..(l + 1) * dim]), i)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, i)| i)
            .expect("n >= clusters");
        sizes[labels[far]] -= 1;
        labels[far] = empty;
        sizes[empty] = 1;
        centroids[empty * dim..(empty + 1) * dim].copy_from_slice(points.row(far));
    }

    while let Some(short) = sizes.iter().position(|&s| s < n_min) {
        let target = centroids[short * dim..(short + 1) * dim].to_vec();
        let mut candidates: Vec<(f64, usize)> = (0..n)
            .filter(|&i| labels[i] != short && sizes[labels[i]] > n_min)
            .map(|i| {
                let l = labels[i];
                let p = points.row(i);
                (
                    dist2(p, &target) - dist2(p, &centroids[l * dim..(l + 1) * dim]),
                    i,
                )
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, i) in candidates {
            if sizes[short] >= n_min {
                break;
            }
            let donor = labels[i];
            if sizes[donor] <= n_min {
                continue;
            }
            sizes[donor] -= 1;
            labels[i] = short;
            sizes[short] += 1;
        }
    }
    labels
}

fn update_centroids(points: &SampleBatch, labels: &[usize], clusters: usize) -> Vec<f64> {
    let dim = points.dim();
    let mut sums = vec![0.0; clusters * dim];
    let mut counts = vec![0usize; clusters];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(points.row(i)) {
            *s += x;
        }
    }
    for (l, c) in counts.iter().enumerate() {
        for s in &mut sums[l * dim..(l + 1) * dim] {
            *s /= *c as f64;
        }
    }
    sums
}

/// Cluster `points` into `clusters` groups of at least `n_min` points each.
pub fn constrained_kmeans(
    points: &SampleBatch,
    clusters: usize,
    n_min: usize,
    rng: &mut SimRng,
) -> Result<KMeansResult> {
    let n = points.n();
    if clusters == 0 {
        return Err(Error::Argument("need at least one cluster".into()));
    }
    if n < clusters * n_min.max(1) {
        return Err(Error::Infeasible { n, clusters, n_min });
    }
    if points.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("points contain non-finite entries".into()));
    }
    if clusters == 1 {
        let centroids = update_centroids(points, &vec![0; n], 1);
        let labels = vec![0; n];
        let sse = within_cluster_sse(points, &labels, &centroids);
        return Ok(KMeansResult {
            labels,
            centroids,
            sse_trace: vec![sse],
            iterations: 1,
        });
    }

    let mut centroids = kmeans_pp(points, clusters, rng);
    let mut labels: Option<Vec<usize>> = None;
    let mut sse_trace = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mut seeded = centroids.clone();
        let candidate = constrained_assign(points, &mut seeded, n_min);
        if let Some(current) = &labels {
            if *current == candidate
                || within_cluster_sse(points, &candidate, &centroids)
                    > within_cluster_sse(points, current, &centroids)
            {
                break;
            }
        }
        iterations += 1;
        centroids = update_centroids(points, &candidate, clusters);
        sse_trace.push(within_cluster_sse(points, &candidate, &centroids));
        labels = Some(candidate);
    }
    Ok(KMeansResult {
        labels: labels.expect("at least one iteration"),
        centroids,
        sse_trace,
        iterations,
    })
}

/// Cluster the outputs `y_star` and carry each label over to the parameter
/// draw that produced it.
pub fn partition_prior(
    theta: &SampleBatch,
    y_star: &SampleBatch,
    clusters: usize,
    n_min: usize,
    rng: &mut SimRng,
) -> Result<PartitionResult> {
    if theta.n() != y_star.n() {
        return Err(Error::Argument(format!(
            "{} parameter draws but {} outputs",
            theta.n(),
            y_star.n()
        )));
    }
    let km = constrained_kmeans(y_star, clusters, n_min, rng)?;
    Ok(PartitionResult::from_labels(km.labels, clusters))
}

impl PartitionResult {
    pub fn from_labels(labels: Vec<usize>, clusters: usize) -> Self {
        let n = labels.len();
        let mut groups = vec![Vec::new(); clusters];
        for (i, &l) in labels.iter().enumerate() {
            groups[l].push(i);
        }
        let counts: Vec<usize> = groups.iter().map(Vec::len).collect();
        let weights = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Self {
            labels,
            groups,
            counts,
            weights,
        }
    }

    /// Everything in one group.
    pub fn single(n: usize) -> Self {
        Self::from_labels(vec![0; n], 1)
    }
}

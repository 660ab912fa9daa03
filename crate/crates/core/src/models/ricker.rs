//! Scaled Ricker map observed through Poisson counts, summarised by 13
//! statistics. A design picks two of the statistics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::{Design, SimulationModel};
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const N_STATISTICS: usize = 13;

/// Gram matrices (after scaling columns to unit norm) with a larger
/// condition number than this are treated as singular.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct RickerModel {
    /// Series length `T`.
    pub horizon: usize,
    /// Latent state `N₁` at the first time step.
    pub initial_state: f64,
}

impl Default for RickerModel {
    fn default() -> Self {
        Self {
            horizon: 50,
            initial_state: 1.0,
        }
    }
}

/// The 13 summary statistics, in table order:
///
/// | index | statistic                    |
/// |-------|------------------------------|
/// | 1     | mean                         |
/// | 2     | number of zeros              |
/// | 3–8   | autocovariance, lags 0–5     |
/// | 9–11  | α₀, α₁, α₂                   |
/// | 12–13 | β₀, β₁                       |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RickerStatistics {
    pub values: [f64; N_STATISTICS],
}

impl RickerStatistics {
    /// Statistic by its 1-based table index.
    pub fn get(&self, index: usize) -> f64 {
        self.values[index - 1]
    }
}

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.len() != 3 {
        return Err(Error::Domain(format!(
            "ricker theta must have 3 entries, got {}",
            theta.len()
        )));
    }
    let (log_r, phi, sigma) = (theta[0], theta[1], theta[2]);
    if !log_r.is_finite()
        || !(phi >= 0.0 && phi.is_finite())
        || !(sigma >= 0.0 && sigma.is_finite())
    {
        return Err(Error::Domain(format!(
            "ricker parameters out of domain: log r = {log_r}, phi = {phi}, sigma = {sigma}"
        )));
    }
    Ok(())
}

/// Simulate `Y₁…Y_T` for `θ = (log r, φ, σ)`.
///
/// Draw order per step: the Poisson count for `N_t`, then the process noise
/// `e_t` that moves the state to `N_{t+1}`.
pub fn ricker_simulate_series(
    theta: &[f64],
    horizon: usize,
    initial_state: f64,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    check_theta(theta)?;
    let (r, phi, sigma) = (theta[0].exp(), theta[1], theta[2]);
    let mut n = initial_state;
    let mut ys = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mean = phi * n;
        let y = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| Error::Domain(format!("poisson mean {mean}: {e}")))?
                .sample(rng)
        } else {
            0.0
        };
        ys.push(y);
        let e: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
        n = r * n * (-n + e).exp();
    }
    Ok(ys)
}

/// Least squares `x β ≈ y`, or `None` when the column-scaled Gram matrix is
/// numerically singular.
fn least_squares(x: DMatrix<f64>, y: DVector<f64>) -> Option<DVector<f64>> {
    let p = x.ncols();
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    if norms.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return None;
    }
    let mut xs = x;
    for (j, s) in norms.iter().enumerate() {
        xs.column_mut(j).scale_mut(1.0 / s);
    }
    let gram = xs.transpose() * &xs;
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return None;
    }
    let rhs = xs.transpose() * y;
    let b = gram.cholesky()?.solve(&rhs);
    Some(DVector::from_iterator(
        p,
        b.iter().zip(&norms).map(|(b, s)| b / s),
    ))
}

fn pow03(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        y.powf(0.3)
    }
}

/// Compute the 13 summary statistics of a count series.
pub fn ricker_statistics(series: &[f64]) -> Result<RickerStatistics> {
    let t = series.len();
    if t < 7 {
        return Err(Error::Argument(format!(
            "ricker statistics need at least 7 observations, got {t}"
        )));
    }
    let mut v = [0.0; N_STATISTICS];
    let tf = t as f64;
    let mean = series.iter().sum::<f64>() / tf;
    v[0] = mean;
    v[1] = series.iter().filter(|&&y| y == 0.0).count() as f64;
    for lag in 0..=5 {
        let s: f64 = (0..t - lag)
            .map(|i| (series[i] - mean) * (series[i + lag] - mean))
            .sum();
        v[2 + lag] = s / tf;
    }

    // y_{t+1} = α₂ (y_{t+1} − y_t)² + α₁ (y_{t+1} − y_t) + α₀
    let m = t - 1;
    let x = DMatrix::from_fn(m, 3, |i, j| {
        let delta = series[i + 1] - series[i];
        match j {
            0 => 1.0,
            1 => delta,
            _ => delta * delta,
        }
    });
    let y = DVector::from_fn(m, |i, _| series[i + 1]);
    if let Some(a) = least_squares(x, y) {
        v[8] = a[0];
        v[9] = a[1];
        v[10] = a[2];
    }

    // y_{t+1}^0.3 = β₀ y_t^0.3 + β₁ y_t^0.6
    let x = DMatrix::from_fn(m, 2, |i, j| {
        let p = pow03(series[i]);
        if j == 0 {
            p
        } else {
            p * p
        }
    });
    let y = DVector::from_fn(m, |i, _| pow03(series[i + 1]));
    if let Some(b) = least_squares(x, y) {
        v[11] = b[0];
        v[12] = b[1];
    }

    if let Some(bad) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("ricker statistic {}", bad + 1)));
    }
    Ok(RickerStatistics { values: v })
}

fn pair(design: &Design) -> Result<(usize, usize)> {
    match design {
        Design::Pair(i, j) if 1 <= *i && i < j && *j <= N_STATISTICS => Ok((*i, *j)),
        other => Err(Error::Domain(format!(
            "ricker design must be a pair 1 <= i < j <= 13, got {other}"
        ))),
    }
}

impl RickerModel {
    fn series_statistics(&self, theta: &[f64], rng: &mut SimRng) -> Result<RickerStatistics> {
        let ys = ricker_simulate_series(theta, self.horizon, self.initial_state, rng)?;
        ricker_statistics(&ys)
    }
}

impl SimulationModel for RickerModel {
    fn name(&self) -> &str {
        "ricker"
    }

    fn theta_dim(&self) -> usize {
        3
    }

    fn dim_y(&self, design: &Design) -> Result<usize> {
        pair(design)?;
        Ok(2)
    }

    fn check_design(&self, design: &Design) -> Result<()> {
        pair(design).map(|_| ())
    }

    fn design_from_coords(&self, coords: &[f64]) -> Result<Design> {
        let [i, j] = coords else {
            return Err(Error::Config(format!(
                "ricker design needs two statistic indices, got {}",
                coords.len()
            )));
        };
        if i.fract() != 0.0 || j.fract() != 0.0 || *i < 1.0 || *j < 1.0 {
            return Err(Error::Config(format!(
                "ricker statistic indices must be positive integers, got ({i}, {j})"
            )));
        }
        let d = Design::Pair(*i as usize, *j as usize);
        self.check_design(&d)?;
        Ok(d)
    }

    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64> {
        let log_r = 3.0 + 2.0 * rng.random::<f64>();
        let phi = 5.0 + 10.0 * rng.random::<f64>();
        let sigma = 0.6 * rng.random::<f64>();
        vec![log_r, phi, sigma]
    }

    fn simulate(&self, theta: &[f64], design: &Design, rng: &mut SimRng) -> Result<Vec<f64>> {
        let (i, j) = pair(design)?;
        let s = self.series_statistics(theta, rng)?;
        Ok(vec![s.get(i), s.get(j)])
    }

    fn simulate_many(
        &self,
        theta: &[f64],
        designs: &[Design],
        rng: &mut SimRng,
    ) -> Result<Vec<Vec<f64>>> {
        let pairs = designs.iter().map(pair).collect::<Result<Vec<_>>>()?;
        let s = self.series_statistics(theta, rng)?;
        Ok(pairs
            .into_iter()
            .map(|(i, j)| vec![s.get(i), s.get(j)])
            .collect())
    }

    /// The mean moves on a grid of `1/T` and the zero count on integers.
    fn lattice(&self, design: &Design) -> Result<Vec<f64>> {
        let (i, j) = pair(design)?;
        let unit = |k: usize| match k {
            1 => 1.0 / self.horizon as f64,
            2 => 1.0,
            _ => 0.0,
        };
        Ok(vec![unit(i), unit(j)])
    }
}

use rand::Rng;
use rand_distr::StandardNormal;

use super::{expect_scalar, Design, SimulationModel};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// `θ ~ N(0, s²I)`, `y = θ + ε`, `ε ~ N(0, σ²I)`; the design is a dummy
/// scalar. The expected information gain is `(dim/2) log(1 + s²/σ²)` and the
/// difference-variable bound is tight, which makes this model the reference
/// case for the estimators.
#[derive(Debug, Clone)]
pub struct GaussianLocationModel {
    pub prior_sd: f64,
    pub noise_sd: f64,
    pub dim: usize,
}

impl Default for GaussianLocationModel {
    fn default() -> Self {
        Self {
            prior_sd: 1.0,
            noise_sd: 1.0,
            dim: 1,
        }
    }
}

impl GaussianLocationModel {
    /// Exact expected KL divergence from prior to posterior, in nats.
    pub fn exact_utility(&self) -> f64 {
        0.5 * self.dim as f64 * (1.0 + (self.prior_sd / self.noise_sd).powi(2)).ln()
    }
}

impl SimulationModel for GaussianLocationModel {
    fn name(&self) -> &str {
        "gaussian_location"
    }

    fn theta_dim(&self) -> usize {
        self.dim
    }

    fn dim_y(&self, design: &Design) -> Result<usize> {
        self.check_design(design)?;
        Ok(self.dim)
    }

    fn check_design(&self, design: &Design) -> Result<()> {
        let d = expect_scalar(design, "gaussian_location")?;
        if !d.is_finite() {
            return Err(Error::Domain("design must be finite".into()));
        }
        Ok(())
    }

    fn design_from_coords(&self, coords: &[f64]) -> Result<Design> {
        match coords {
            [d] => Ok(Design::Scalar(*d)),
            _ => Err(Error::Config(
                "gaussian_location design needs exactly one coordinate".into(),
            )),
        }
    }

    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64> {
        (0..self.dim)
            .map(|_| self.prior_sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn simulate(&self, theta: &[f64], design: &Design, rng: &mut SimRng) -> Result<Vec<f64>> {
        self.check_design(design)?;
        Ok(theta
            .iter()
            .map(|t| t + self.noise_sd * rng.sample::<f64, _>(StandardNormal))
            .collect())
    }

    fn log_likelihood(&self, y: &[f64], theta: &[f64], _design: &Design) -> Option<f64> {
        let var = self.noise_sd * self.noise_sd;
        let ss: f64 = y.iter().zip(theta).map(|(a, b)| (a - b) * (a - b)).sum();
        Some(-0.5 * self.dim as f64 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * ss / var)
    }
}

use rand::Rng;
use rand_distr::StandardNormal;

use super::{expect_scalar, Design, SimulationModel};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// `G(θ, d) = θ (1 − θ)^(d−1) / B(2, d)`.
///
/// `B(2, d) = 1 / (d (d + 1))`, so the normaliser is applied as a product.
pub fn toy_g(theta: f64, d: f64) -> f64 {
    if theta <= 0.0 || theta >= 1.0 {
        return 0.0;
    }
    d * (d + 1.0) * theta * ((d - 1.0) * (-theta).ln_1p()).exp()
}

/// `y = G(θ, d)(1 + ε₁) + ε₂` with `ε₁, ε₂ ~ N(0, σ²)`.
#[derive(Debug, Clone)]
pub struct ToyModel {
    pub noise_sd: f64,
    pub design_lo: f64,
    pub design_hi: f64,
}

impl Default for ToyModel {
    fn default() -> Self {
        Self {
            noise_sd: 0.05,
            design_lo: 2.0,
            design_hi: 100.0,
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("toy theta {theta} outside [0, 1]")));
    }
    Ok(())
}

impl ToyModel {
    fn check_d(&self, d: f64) -> Result<()> {
        if !(self.design_lo..=self.design_hi).contains(&d) {
            return Err(Error::Domain(format!(
                "toy design {d} outside [{}, {}]",
                self.design_lo, self.design_hi
            )));
        }
        Ok(())
    }

    /// Variance of `y | θ, d`.
    pub fn variance(&self, g: f64) -> f64 {
        self.noise_sd * self.noise_sd * (1.0 + g * g)
    }
}

/// One draw of the toy simulator with the default noise level.
pub fn toy_simulate(theta: f64, d: f64, rng: &mut SimRng) -> Result<f64> {
    let m = ToyModel::default();
    let y = m.simulate(&[theta], &Design::Scalar(d), rng)?;
    Ok(y[0])
}

impl SimulationModel for ToyModel {
    fn name(&self) -> &str {
        "toy"
    }

    fn theta_dim(&self) -> usize {
        1
    }

    fn dim_y(&self, design: &Design) -> Result<usize> {
        self.check_design(design)?;
        Ok(1)
    }

    fn check_design(&self, design: &Design) -> Result<()> {
        self.check_d(expect_scalar(design, "toy")?)
    }

    fn design_from_coords(&self, coords: &[f64]) -> Result<Design> {
        match coords {
            [d] => {
                let design = Design::Scalar(*d);
                self.check_design(&design)?;
                Ok(design)
            }
            _ => Err(Error::Config(format!(
                "toy design needs exactly one coordinate, got {}",
                coords.len()
            ))),
        }
    }

    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64> {
        vec![rng.random::<f64>()]
    }

    fn simulate(&self, theta: &[f64], design: &Design, rng: &mut SimRng) -> Result<Vec<f64>> {
        let d = expect_scalar(design, "toy")?;
        self.check_d(d)?;
        check_theta(theta[0])?;
        let g = toy_g(theta[0], d);
        let e1: f64 = rng.sample::<f64, _>(StandardNormal) * self.noise_sd;
        let e2: f64 = rng.sample::<f64, _>(StandardNormal) * self.noise_sd;
        Ok(vec![g * (1.0 + e1) + e2])
    }

    fn log_likelihood(&self, y: &[f64], theta: &[f64], design: &Design) -> Option<f64> {
        let d = expect_scalar(design, "toy").ok()?;
        let g = toy_g(theta[0], d);
        let var = self.variance(g);
        let r = y[0] - g;
        Some(-0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * r * r / var)
    }
}

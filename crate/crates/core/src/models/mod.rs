//! Generative models: the simulator interface and the benchmark problems.

mod aphid;
mod gaussian;
mod ricker;
mod toy;

pub use aphid::{aphid_simulate, AphidModel, APHID_INITIAL_STATE};
pub use gaussian::GaussianLocationModel;
pub use ricker::{ricker_simulate_series, ricker_statistics, RickerModel, RickerStatistics};
pub use toy::{toy_g, toy_simulate, ToyModel};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// A single experimental design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Design {
    /// A real design parameter (toy model, Gaussian location model).
    Scalar(f64),
    /// A 1-based pair of summary-statistic indices `i < j` (Ricker model).
    Pair(usize, usize),
    /// Sorted observation times (Aphid model).
    Times(Vec<f64>),
}

impl Design {
    /// Numeric coordinates, as written to CSV and JSON.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Design::Scalar(d) => vec![*d],
            Design::Pair(i, j) => vec![*i as f64, *j as f64],
            Design::Times(t) => t.clone(),
        }
    }

    /// Lexicographic comparison of coordinates; used for argmax tie-breaking.
    pub fn lex_cmp(&self, other: &Design) -> std::cmp::Ordering {
        let (a, b) = (self.coords(), other.coords());
        for (x, y) in a.iter().zip(&b) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        a.len().cmp(&b.len())
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coords();
        write!(f, "(")?;
        for (i, x) in c.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A generative model `θ ~ p(θ)`, `y ~ p(y | θ, d)`.
///
/// Implementations must be pure given the generator: identical `(θ, d)` and
/// identical generator state produce identical output.
pub trait SimulationModel: Sync {
    fn name(&self) -> &str;

    /// Dimension `p` of the parameter vector.
    fn theta_dim(&self) -> usize;

    /// Dimension of one observation under `design`.
    fn dim_y(&self, design: &Design) -> Result<usize>;

    /// Reject designs outside the model's design space.
    fn check_design(&self, design: &Design) -> Result<()>;

    /// Build a design from its numeric coordinates.
    fn design_from_coords(&self, coords: &[f64]) -> Result<Design>;

    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64>;

    fn simulate(&self, theta: &[f64], design: &Design, rng: &mut SimRng) -> Result<Vec<f64>>;

    /// Simulate one observation per design, all driven by the same stream.
    ///
    /// Entry `j` must equal `simulate(theta, &designs[j], &mut rng.clone())`.
    /// Models whose designs are views of one underlying realisation (a time
    /// series, a trajectory) override this to simulate once.
    fn simulate_many(
        &self,
        theta: &[f64],
        designs: &[Design],
        rng: &mut SimRng,
    ) -> Result<Vec<Vec<f64>>> {
        let start = rng.clone();
        let mut out = Vec::with_capacity(designs.len());
        for d in designs {
            *rng = start.clone();
            out.push(self.simulate(theta, d, rng)?);
        }
        Ok(out)
    }

    /// Exact `log p(y | θ, d)` in nats, when the likelihood is tractable.
    fn log_likelihood(&self, _y: &[f64], _theta: &[f64], _design: &Design) -> Option<f64> {
        None
    }

    /// Per-coordinate lattice spacing of the observations; zero for continuous
    /// coordinates. Used as the default jitter before entropy estimation.
    fn lattice(&self, design: &Design) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.dim_y(design)?])
    }
}

pub(crate) fn expect_scalar(design: &Design, model: &str) -> Result<f64> {
    match design {
        Design::Scalar(d) => Ok(*d),
        other => Err(Error::Domain(format!(
            "{model} model expects a scalar design, got {other}"
        ))),
    }
}

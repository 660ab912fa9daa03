//! Aphid population birth–death process, simulated exactly.
//!
//! State `(n, c)` is the live and cumulative population. Births
//! `(n, c) → (n + 1, c + 1)` occur at rate `λ n`; deaths `(n, c) → (n − 1, c)`
//! at rate `μ n c`. A design is the set of observation times.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{Design, SimulationModel};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// `N(0) = C(0)`.
pub const APHID_INITIAL_STATE: u64 = 28;

#[derive(Debug, Clone)]
pub struct AphidModel {
    pub prior_mean: [f64; 2],
    pub prior_cov: [[f64; 2]; 2],
    pub horizon: f64,
}

impl Default for AphidModel {
    fn default() -> Self {
        Self {
            prior_mean: [0.246, 0.000136],
            prior_cov: [[0.0079 * 0.0079, 5.8e-8], [5.8e-8, 0.00002 * 0.00002]],
            horizon: 50.0,
        }
    }
}

fn check_rates(theta: &[f64]) -> Result<(f64, f64)> {
    match theta {
        [lambda, mu] if *lambda >= 0.0 && *mu >= 0.0 && lambda.is_finite() && mu.is_finite() => {
            Ok((*lambda, *mu))
        }
        _ => Err(Error::Domain(format!(
            "aphid rates must be two nonnegative finite numbers, got {theta:?}"
        ))),
    }
}

/// Run the jump process and report `(N, C)` at each of the sorted `times`.
///
/// The recorded state at `t` is the state after every event strictly before
/// `t`. The stream is consumed identically up to the last requested time, so
/// observing a superset of times reproduces the same values at shared times.
pub fn aphid_observe(theta: &[f64], times: &[f64], rng: &mut SimRng) -> Result<Vec<(u64, u64)>> {
    let (lambda, mu) = check_rates(theta)?;
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain(
            "observation times must be finite and sorted".into(),
        ));
    }
    let mut out = Vec::with_capacity(times.len());
    let (mut n, mut c) = (APHID_INITIAL_STATE, APHID_INITIAL_STATE);
    let mut t = 0.0;
    while out.len() < times.len() {
        if n == 0 {
            out.resize(times.len(), (0, c));
            break;
        }
        let birth = lambda * n as f64;
        let rate = birth + mu * n as f64 * c as f64;
        let t_next = if rate > 0.0 {
            t + rng.sample::<f64, _>(Exp1) / rate
        } else {
            f64::INFINITY
        };
        while out.len() < times.len() && times[out.len()] < t_next {
            out.push((n, c));
        }
        if out.len() == times.len() {
            break;
        }
        if rng.random::<f64>() * rate < birth {
            n += 1;
            c += 1;
        } else {
            n -= 1;
        }
        t = t_next;
    }
    Ok(out)
}

/// Live population counts `N(t₁), …, N(t_k)` for sorted times.
pub fn aphid_simulate(theta: &[f64], times: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
    Ok(aphid_observe(theta, times, rng)?
        .into_iter()
        .map(|(n, _)| n as f64)
        .collect())
}

impl AphidModel {
    fn times<'a>(&self, design: &'a Design) -> Result<&'a [f64]> {
        match design {
            Design::Times(t)
                if !t.is_empty()
                    && t.iter().all(|x| (0.0..=self.horizon).contains(x))
                    && t.windows(2).all(|w| w[0] <= w[1]) =>
            {
                Ok(t)
            }
            other => Err(Error::Domain(format!(
                "aphid design must be nonempty sorted times in [0, {}], got {other}",
                self.horizon
            ))),
        }
    }
}

impl SimulationModel for AphidModel {
    fn name(&self) -> &str {
        "aphid"
    }

    fn theta_dim(&self) -> usize {
        2
    }

    fn dim_y(&self, design: &Design) -> Result<usize> {
        Ok(self.times(design)?.len())
    }

    fn check_design(&self, design: &Design) -> Result<()> {
        self.times(design).map(|_| ())
    }

    fn design_from_coords(&self, coords: &[f64]) -> Result<Design> {
        let d = Design::Times(coords.to_vec());
        self.check_design(&d)?;
        Ok(d)
    }

    /// Correlated Gaussian prior; draws with a nonpositive rate are redrawn.
    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64> {
        let [[a, b], [_, d]] = self.prior_cov;
        let l11 = a.sqrt();
        let l21 = b / l11;
        let l22 = (d - l21 * l21).sqrt();
        loop {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let lambda = self.prior_mean[0] + l11 * z1;
            let mu = self.prior_mean[1] + l21 * z1 + l22 * z2;
            if lambda > 0.0 && mu > 0.0 {
                return vec![lambda, mu];
            }
        }
    }

    fn simulate(&self, theta: &[f64], design: &Design, rng: &mut SimRng) -> Result<Vec<f64>> {
        aphid_simulate(theta, self.times(design)?, rng)
    }

    fn simulate_many(
        &self,
        theta: &[f64],
        designs: &[Design],
        rng: &mut SimRng,
    ) -> Result<Vec<Vec<f64>>> {
        let mut all: Vec<f64> = Vec::new();
        for d in designs {
            all.extend_from_slice(self.times(d)?);
        }
        all.sort_by(f64::total_cmp);
        all.dedup();
        let counts = aphid_simulate(theta, &all, rng)?;
        let lookup = |t: &f64| counts[all.binary_search_by(|x| x.total_cmp(t)).unwrap()];
        Ok(designs
            .iter()
            .map(|d| match d {
                Design::Times(ts) => ts.iter().map(lookup).collect(),
                _ => unreachable!("validated above"),
            })
            .collect())
    }

    fn lattice(&self, design: &Design) -> Result<Vec<f64>> {
        Ok(vec![1.0; self.dim_y(design)?])
    }
}

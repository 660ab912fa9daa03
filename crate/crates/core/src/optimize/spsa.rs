//! Simultaneous-perturbation stochastic approximation over a sorted box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid_point;
use crate::error::{Error, Result};
use crate::rng::{role, StreamKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpsaConfig {
    pub iterations: usize,
    /// Replications per utility evaluation.
    pub replications: usize,
    /// Step-gain decay exponent.
    pub alpha: f64,
    /// Perturbation decay exponent.
    pub gamma: f64,
    /// Step-gain numerator; derived from a gradient probe when unset.
    pub a: Option<f64>,
    /// Perturbation size in design units; 2% of the box width when unset.
    pub c: Option<f64>,
    /// Stability constant; 10% of `iterations` when unset.
    pub stability: Option<f64>,
    /// Starting design; evenly spaced interior points when unset.
    pub initial: Option<Vec<f64>>,
    /// Gradient estimates averaged to set `a`.
    pub gain_probes: usize,
    /// Target size of the first step as a fraction of the box width.
    pub first_step: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            replications: 5,
            alpha: 0.602,
            gamma: 0.101,
            a: None,
            c: None,
            stability: None,
            initial: None,
            gain_probes: 4,
            first_step: 0.02,
        }
    }
}

/// One SPSA iteration: the iterate it started from and the mean of the two
/// perturbed utility evaluations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpsaStep {
    pub iteration: usize,
    pub design: Vec<f64>,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaOutcome {
    /// Final iterate snapped to the grid.
    pub design: Vec<f64>,
    pub trace: Vec<SpsaStep>,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
}

/// Clamp every coordinate into `[lo, hi]`, then sort ascending.
pub fn project_sorted(x: &mut [f64], lo: f64, hi: f64) {
    for v in x.iter_mut() {
        *v = v.clamp(lo, hi);
    }
    x.sort_by(f64::total_cmp);
}

fn snap(x: &[f64], lo: f64, hi: f64, res: f64) -> Vec<f64> {
    let mut out: Vec<f64> = x
        .iter()
        .map(|v| grid_point(lo, ((v - lo) / res).round(), res).clamp(lo, hi))
        .collect();
    project_sorted(&mut out, lo, hi);
    out
}

fn perturbation(key: StreamKey, k: usize) -> Vec<f64> {
    let mut rng = key.rng();
    (0..k)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Maximise a noisy utility `f(design, crn_seed)` over sorted designs in
/// `[lo, hi]^k`.
///
/// Both evaluations of an iteration share one seed (common random numbers).
pub fn spsa_maximize(
    mut f: impl FnMut(&[f64], u64) -> Result<f64>,
    k: usize,
    lo: f64,
    hi: f64,
    grid_resolution: f64,
    cfg: &SpsaConfig,
    seed: u64,
) -> Result<SpsaOutcome> {
    if k == 0 || !(lo < hi) || !(grid_resolution > 0.0) {
        return Err(Error::Config("SPSA needs k >= 1 and a nonempty box".into()));
    }
    let width = hi - lo;
    let key = StreamKey::new(seed).child(role::SPSA);
    let stability = cfg.stability.unwrap_or(0.1 * cfg.iterations as f64);
    let c = cfg.c.unwrap_or(0.02 * width);
    let mut x = match &cfg.initial {
        Some(v) if v.len() == k => v.clone(),
        Some(v) => {
            return Err(Error::Config(format!(
                "initial design has {} coordinates, expected {k}",
                v.len()
            )))
        }
        None => (0..k)
            .map(|i| lo + width * (i + 1) as f64 / (k + 1) as f64)
            .collect(),
    };
    project_sorted(&mut x, lo, hi);

    let mut evaluate = |x: &[f64], delta: &[f64], ck: f64, crn: u64| -> Result<(f64, f64)> {
        let mut plus: Vec<f64> = x.iter().zip(delta).map(|(v, d)| v + ck * d).collect();
        let mut minus: Vec<f64> = x.iter().zip(delta).map(|(v, d)| v - ck * d).collect();
        project_sorted(&mut plus, lo, hi);
        project_sorted(&mut minus, lo, hi);
        Ok((f(&plus, crn)?, f(&minus, crn)?))
    };

    let a = match cfg.a {
        Some(a) => a,
        None => {
            let mut total = 0.0;
            let probes = cfg.gain_probes.max(1);
            for p in 0..probes as u64 {
                let probe = key.at(1, p);
                let delta = perturbation(probe.child(0), k);
                let (up, um) = evaluate(&x, &delta, c, iteration_seed(!seed, p as usize))?;
                total += ((up - um) / (2.0 * c)).abs();
            }
            let g = total / probes as f64;
            let scale = cfg.first_step * width * (stability + 1.0).powf(cfg.alpha);
            if g > 0.0 && g.is_finite() {
                scale / g
            } else {
                scale
            }
        }
    };

    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut aborted = None;
    for m in 0..cfg.iterations {
        let am = a / (m as f64 + 1.0 + stability).powf(cfg.alpha);
        let cm = c / (m as f64 + 1.0).powf(cfg.gamma);
        let delta = perturbation(key.at(0, m as u64), k);
        let (up, um) = evaluate(&x, &delta, cm, iteration_seed(seed, m))?;
        let utility = 0.5 * (up + um);
        trace.push(SpsaStep {
            iteration: m,
            design: x.clone(),
            utility,
        });
        if !up.is_finite() || !um.is_finite() {
            aborted = Some(format!("non-finite utility at iteration {m}"));
            break;
        }
        for (v, d) in x.iter_mut().zip(&delta) {
            *v += am * (up - um) / (2.0 * cm * d);
        }
        project_sorted(&mut x, lo, hi);
    }
    Ok(SpsaOutcome {
        design: snap(&x, lo, hi, grid_resolution),
        trace,
        aborted,
    })
}

fn iteration_seed(seed: u64, m: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(m as u64 + 1)
}

//! Search over design spaces: exhaustive sweeps and SPSA.

mod spsa;

pub use spsa::{project_sorted, spsa_maximize, SpsaConfig, SpsaOutcome, SpsaStep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Estimator, UtilityEstimate};
use crate::models::{Design, SimulationModel};

/// Designs evaluated together from one set of simulations.
const SWEEP_CHUNK: usize = 64;

/// Largest `k` for which a time box is enumerated exhaustively.
pub const MAX_EXHAUSTIVE_TIMES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSpec {
    /// A single design given by its coordinates.
    Point { value: Vec<f64> },
    /// `grid_points` equally spaced values in `[lo, hi]`, endpoints included.
    ScalarInterval {
        lo: f64,
        hi: f64,
        grid_points: usize,
    },
    /// All pairs `1 <= i < j <= m`.
    IndexPairs { m: usize },
    /// `k` sorted times in `[lo, hi]` on a grid of spacing `grid_resolution`.
    TimeBox {
        k: usize,
        lo: f64,
        hi: f64,
        grid_resolution: f64,
    },
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            DesignSpec::Point { value } if value.is_empty() => bad("design.value is empty".into()),
            DesignSpec::ScalarInterval {
                lo,
                hi,
                grid_points,
            } => {
                if !(lo <= hi) || *grid_points == 0 || (*grid_points == 1 && lo != hi) {
                    return bad(format!(
                        "scalar_interval needs lo <= hi and grid_points >= 2 (got [{lo}, {hi}], {grid_points})"
                    ));
                }
                Ok(())
            }
            DesignSpec::IndexPairs { m } if *m < 2 => bad("index_pairs needs m >= 2".into()),
            DesignSpec::TimeBox {
                k,
                lo,
                hi,
                grid_resolution,
            } => {
                if *k == 0 || !(lo < hi) || !(*grid_resolution > 0.0) {
                    return bad(format!(
                        "time_box needs k >= 1, lo < hi and grid_resolution > 0 (got k = {k}, [{lo}, {hi}], {grid_resolution})"
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Coordinates of every design, in lexicographic order.
    pub fn enumerate(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        match self {
            DesignSpec::Point { value } => Ok(vec![value.clone()]),
            DesignSpec::ScalarInterval {
                lo,
                hi,
                grid_points,
            } => {
                if *grid_points == 1 {
                    return Ok(vec![vec![*lo]]);
                }
                let step = (hi - lo) / (*grid_points - 1) as f64;
                Ok((0..*grid_points)
                    .map(|i| {
                        if i + 1 == *grid_points {
                            vec![*hi]
                        } else {
                            vec![lo + i as f64 * step]
                        }
                    })
                    .collect())
            }
            DesignSpec::IndexPairs { m } => Ok((1..=*m)
                .flat_map(|i| (i + 1..=*m).map(move |j| vec![i as f64, j as f64]))
                .collect()),
            DesignSpec::TimeBox { k, .. } if *k > MAX_EXHAUSTIVE_TIMES => Err(Error::Config(
                format!("time_box with k = {k} is not enumerable; use the optimize command (SPSA)"),
            )),
            DesignSpec::TimeBox { k, .. } => {
                let grid = self.time_grid();
                if *k == 1 {
                    Ok(grid.into_iter().map(|t| vec![t]).collect())
                } else {
                    Ok((0..grid.len())
                        .flat_map(|a| (a + 1..grid.len()).map(move |b| (a, b)))
                        .map(|(a, b)| vec![grid[a], grid[b]])
                        .collect())
                }
            }
        }
    }

    /// Grid of admissible times for a time box; empty for other kinds.
    pub fn time_grid(&self) -> Vec<f64> {
        match self {
            DesignSpec::TimeBox {
                lo,
                hi,
                grid_resolution,
                ..
            } => {
                let steps = ((hi - lo) / grid_resolution + 1e-9).floor() as usize;
                (0..=steps)
                    .map(|i| grid_point(*lo, i as f64, *grid_resolution).min(*hi))
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

/// `lo + steps * res`, dividing by the reciprocal when it is integral so a
/// resolution of 0.01 yields 13.8 rather than 13.800000000000001.
pub(crate) fn grid_point(lo: f64, steps: f64, res: f64) -> f64 {
    let inv = 1.0 / res;
    if (inv - inv.round()).abs() < 1e-9 && inv.round() > 0.0 {
        lo + steps / inv.round()
    } else {
        lo + steps * res
    }
}

/// All evaluated designs with the best one.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<UtilityEstimate>,
    pub argmax: usize,
}

impl SweepResult {
    pub fn argmax_design(&self) -> &Design {
        &self.rows[self.argmax].design
    }

    pub fn argmax_value(&self) -> f64 {
        self.rows[self.argmax].value
    }

    /// 0-based rank of `design` by value, best first (ties by design order).
    pub fn rank_of(&self, design: &Design) -> Option<usize> {
        let target = self.rows.iter().find(|r| &r.design == design)?;
        Some(
            self.rows
                .iter()
                .filter(|r| {
                    r.value > target.value
                        || (r.value == target.value && r.design.lex_cmp(&target.design).is_lt())
                })
                .count(),
        )
    }
}

/// Index of the maximal value; ties go to the lexicographically smallest
/// design.
pub fn argmax(rows: &[UtilityEstimate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let cur = &rows[b];
                if r.value > cur.value
                    || (r.value == cur.value && r.design.lex_cmp(&cur.design).is_lt())
                {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Evaluate `designs` in chunks with `eval` and collect the rows.
pub fn sweep_designs(
    designs: &[Design],
    mut eval: impl FnMut(&[Design]) -> Result<Vec<UtilityEstimate>>,
) -> Result<SweepResult> {
    if designs.is_empty() {
        return Err(Error::Config("design space is empty".into()));
    }
    let mut rows = Vec::with_capacity(designs.len());
    for chunk in designs.chunks(SWEEP_CHUNK) {
        let out = eval(chunk)?;
        if out.len() != chunk.len() {
            return Err(Error::Argument(format!(
                "estimator returned {} rows for {} designs",
                out.len(),
                chunk.len()
            )));
        }
        rows.extend(out);
    }
    let argmax = argmax(&rows).expect("nonempty");
    Ok(SweepResult { rows, argmax })
}

/// Evaluate the estimator at every design of an enumerable spec.
pub fn sweep(
    model: &dyn SimulationModel,
    spec: &DesignSpec,
    estimator: &Estimator,
    seed: u64,
) -> Result<SweepResult> {
    estimator.validate()?;
    let designs = spec
        .enumerate()?
        .iter()
        .map(|c| model.design_from_coords(c))
        .collect::<Result<Vec<_>>>()?;
    sweep_designs(&designs, |chunk| {
        estimator.estimate_many(model, chunk, seed)
    })
}

/// Maximise over a time box: exhaustive on the grid for `k <= 2`, SPSA
/// otherwise. Returns the chosen design and its trace (sweep rows or SPSA
/// iterates).
pub fn optimize_times(
    model: &dyn SimulationModel,
    spec: &DesignSpec,
    estimator: &Estimator,
    spsa: &SpsaConfig,
    seed: u64,
) -> Result<OptimizeOutcome> {
    let DesignSpec::TimeBox {
        k,
        lo,
        hi,
        grid_resolution,
    } = spec
    else {
        return Err(Error::Config("optimize needs a time_box design".into()));
    };
    spec.validate()?;
    estimator.validate()?;
    if *k <= MAX_EXHAUSTIVE_TIMES {
        let s = sweep(model, spec, estimator, seed)?;
        return Ok(OptimizeOutcome::Exhaustive(s));
    }
    let est = estimator.with_replications(spsa.replications);
    let eval = |coords: &[f64], crn: u64| -> Result<f64> {
        let d = model.design_from_coords(coords)?;
        Ok(est.estimate(model, &d, crn)?.value)
    };
    let out = spsa_maximize(eval, *k, *lo, *hi, *grid_resolution, spsa, seed)?;
    Ok(OptimizeOutcome::Spsa(out))
}

#[derive(Debug, Clone)]
pub enum OptimizeOutcome {
    Exhaustive(SweepResult),
    Spsa(SpsaOutcome),
}

impl OptimizeOutcome {
    pub fn design(&self) -> Vec<f64> {
        match self {
            OptimizeOutcome::Exhaustive(s) => s.argmax_design().coords(),
            OptimizeOutcome::Spsa(o) => o.design.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorKind;

    #[test]
    fn scalar_grid_includes_endpoints() {
        let g = DesignSpec::ScalarInterval {
            lo: 2.0,
            hi: 100.0,
            grid_points: 25,
        }
        .enumerate()
        .unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], vec![2.0]);
        assert_eq!(g[24], vec![100.0]);
    }

    #[test]
    fn index_pairs_count() {
        let p = DesignSpec::IndexPairs { m: 13 }.enumerate().unwrap();
        assert_eq!(p.len(), 78);
        assert_eq!(p[0], vec![1.0, 2.0]);
        assert!(p.iter().all(|c| c[0] < c[1]));
    }

    #[test]
    fn time_boxes() {
        let one = DesignSpec::TimeBox {
            k: 1,
            lo: 0.0,
            hi: 50.0,
            grid_resolution: 1.0,
        };
        assert_eq!(one.enumerate().unwrap().len(), 51);
        let two = DesignSpec::TimeBox {
            k: 2,
            lo: 0.0,
            hi: 50.0,
            grid_resolution: 1.0,
        };
        assert_eq!(two.enumerate().unwrap().len(), 51 * 50 / 2);
        let four = DesignSpec::TimeBox {
            k: 4,
            lo: 0.0,
            hi: 50.0,
            grid_resolution: 0.01,
        };
        assert!(matches!(four.enumerate(), Err(Error::Config(_))));
        let fine = DesignSpec::TimeBox {
            k: 1,
            lo: 0.0,
            hi: 50.0,
            grid_resolution: 0.01,
        };
        assert_eq!(fine.enumerate().unwrap().len(), 5001);
    }

    fn mock(chunk: &[Design]) -> Result<Vec<UtilityEstimate>> {
        Ok(chunk
            .iter()
            .map(|d| UtilityEstimate {
                design: d.clone(),
                kind: EstimatorKind::LbkldPartition,
                value: 1.0,
                std_error: 0.0,
                n_sims: 0,
                replications: 1,
                replicates: vec![],
                floored: 0,
            })
            .collect())
    }

    #[test]
    fn constant_utility_picks_smallest_design() {
        let mut designs: Vec<Design> = DesignSpec::IndexPairs { m: 5 }
            .enumerate()
            .unwrap()
            .iter()
            .map(|c| Design::Pair(c[0] as usize, c[1] as usize))
            .collect();
        designs.reverse();
        let s = sweep_designs(&designs, mock).unwrap();
        assert_eq!(s.rows.len(), 10);
        assert_eq!(s.argmax_design(), &Design::Pair(1, 2));
        assert_eq!(s.rank_of(&Design::Pair(1, 2)), Some(0));
        assert_eq!(s.rank_of(&Design::Pair(1, 3)), Some(1));
    }
}

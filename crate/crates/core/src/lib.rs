//! Simulation-based Bayesian experimental design.
//!
//! The expected utility of a design is estimated with a lower bound on the
//! expected Kullback-Leibler divergence between posterior and prior, built
//! from nearest-neighbour entropy estimates of simulated data. Nested Monte
//! Carlo and ABC posterior-precision utilities are provided for comparison,
//! along with exhaustive and SPSA design search.
//!
//! ```
//! use lbkld::estimators::{Estimator, LbkldConfig};
//! use lbkld::models::{Design, ToyModel};
//!
//! let est = Estimator::LbkldPartition(LbkldConfig {
//!     n: 400,
//!     replications: 2,
//!     ..Default::default()
//! });
//! let u = est.estimate(&ToyModel::default(), &Design::Scalar(5.0), 1).unwrap();
//! assert!(u.value.is_finite());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod error;
pub mod estimators;
pub mod models;
pub mod optimize;
pub mod partition;
pub mod rng;

pub use error::{Error, Result};
pub use rng::{SimRng, StreamKey};

//! For a Gaussian location model the lower bound is tight: the LB-KLD
//! estimate, nested Monte Carlo and the closed form all agree.
//!
//! cargo run --release --example gaussian_equality

use lbkld::estimators::{Estimator, LbkldConfig, NestedMcConfig};
use lbkld::models::{Design, GaussianLocationModel};

fn main() -> lbkld::Result<()> {
    let d = Design::Scalar(0.0);
    for prior_sd in [0.5, 1.0, 2.0] {
        let model = GaussianLocationModel {
            prior_sd,
            ..Default::default()
        };
        let lb = Estimator::LbkldNoPartition(LbkldConfig {
            n: 5000,
            replications: 20,
            ..Default::default()
        })
        .estimate(&model, &d, 1)?;
        let nmc = Estimator::NestedMc(NestedMcConfig {
            n: 10_000,
            n_inner: 1000,
            replications: 1,
        })
        .estimate(&model, &d, 2)?;
        println!(
            "prior sd {prior_sd}: exact {:.4}  LB-KLD {:.4} ± {:.4}  nested MC {:.4} ± {:.4}",
            model.exact_utility(),
            lb.value,
            lb.std_error,
            nmc.value,
            nmc.std_error
        );
    }
    Ok(())
}

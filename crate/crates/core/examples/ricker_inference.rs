//! Posterior-mean accuracy of ABC inference on the Ricker model when only the
//! statistic pairs (1, 2) or (2, 3) are observed.
//!
//! cargo run --release --example ricker_inference -- 1000

use lbkld::estimators::{replicate_inference, AbcConfig};
use lbkld::models::{Design, RickerModel};

fn main() -> lbkld::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let studies = replicate_inference(
        &RickerModel::default(),
        &[Design::Pair(1, 2), Design::Pair(2, 3)],
        &AbcConfig::default(),
        trials,
        1,
    )?;
    println!("{trials} trials; MSE of posterior means");
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "design", "log r", "phi", "sigma"
    );
    for s in &studies {
        println!(
            "{:>8} {:>10.4} {:>10.4} {:>10.4}",
            s.design.to_string(),
            s.mse[0],
            s.mse[1],
            s.mse[2]
        );
    }
    Ok(())
}

//! Best single observation time for the aphid model on the integer grid.
//!
//! cargo run --release --example aphid_one_time

use lbkld::estimators::{AbcConfig, Estimator, LbkldConfig};
use lbkld::models::AphidModel;
use lbkld::optimize::{sweep, DesignSpec};

fn main() -> lbkld::Result<()> {
    let model = AphidModel::default();
    let grid = DesignSpec::TimeBox {
        k: 1,
        lo: 0.0,
        hi: 50.0,
        grid_resolution: 1.0,
    };
    let lb = sweep(
        &model,
        &grid,
        &Estimator::LbkldPartition(LbkldConfig {
            n: 5000,
            replications: 10,
            ..Default::default()
        }),
        1,
    )?;
    let dp = sweep(
        &model,
        &grid,
        &Estimator::DPosterior(AbcConfig::default()),
        2,
    )?;
    println!("{:>4} {:>10} {:>14}", "t", "LB-KLD", "D-posterior");
    for (a, b) in lb.rows.iter().zip(&dp.rows) {
        println!(
            "{:>4} {:>10.4} {:>14.4e}",
            a.design.coords()[0],
            a.value,
            b.value
        );
    }
    println!(
        "argmax: LB-KLD {}, D-posterior {}",
        lb.argmax_design(),
        dp.argmax_design()
    );
    Ok(())
}

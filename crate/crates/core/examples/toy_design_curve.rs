//! Expected utility of the toy model over d in [2, 100] for every estimator,
//! printed as CSV.
//!
//! cargo run --release --example toy_design_curve > toy.csv

use lbkld::estimators::{AbcConfig, Estimator, LbkldConfig, NestedMcConfig};
use lbkld::models::ToyModel;
use lbkld::optimize::{sweep, DesignSpec};

fn main() -> lbkld::Result<()> {
    let model = ToyModel::default();
    let grid = DesignSpec::ScalarInterval {
        lo: 2.0,
        hi: 100.0,
        grid_points: 25,
    };
    let lb = LbkldConfig {
        n: 10_000,
        replications: 20,
        ..Default::default()
    };
    let estimators = [
        Estimator::LbkldPartition(lb.clone()),
        Estimator::LbkldNoPartition(lb),
        Estimator::NestedMc(NestedMcConfig {
            n: 20_000,
            n_inner: 1000,
            replications: 1,
        }),
        Estimator::DPosterior(AbcConfig {
            replications: 20,
            ..Default::default()
        }),
    ];
    println!("d,estimator,value,std_error");
    for (i, e) in estimators.iter().enumerate() {
        let s = sweep(&model, &grid, e, 10 + i as u64)?;
        for r in &s.rows {
            println!(
                "{},{},{},{}",
                r.design.coords()[0],
                r.kind.as_str(),
                r.value,
                r.std_error
            );
        }
        eprintln!("{}: argmax d = {}", e.kind().as_str(), s.argmax_design());
    }
    Ok(())
}

//! SPSA search for k aphid observation times, scored against reference
//! designs by LB-KLD.
//!
//! cargo run --release --example aphid_spsa -- 4

use lbkld::estimators::{Estimator, LbkldConfig};
use lbkld::models::{AphidModel, Design};
use lbkld::optimize::{optimize_times, DesignSpec, SpsaConfig};

fn main() -> lbkld::Result<()> {
    let k: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let model = AphidModel::default();
    let spec = DesignSpec::TimeBox {
        k,
        lo: 0.0,
        hi: 50.0,
        grid_resolution: 0.1,
    };
    let est = Estimator::LbkldPartition(LbkldConfig {
        n: 1000,
        ..Default::default()
    });
    let spsa = SpsaConfig {
        iterations: 100,
        replications: 2,
        ..Default::default()
    };
    let out = optimize_times(&model, &spec, &est, &spsa, 1)?;
    let found = out.design();
    println!("SPSA design: {found:?}");

    let judge = Estimator::LbkldPartition(LbkldConfig {
        n: 5000,
        replications: 20,
        ..Default::default()
    });
    let mut candidates = vec![("SPSA", found)];
    if k == 4 {
        candidates.push(("reference LB-KLD", vec![13.8, 19.1, 24.5, 30.6]));
        candidates.push(("reference D-posterior", vec![15.8, 20.4, 25.2, 30.5]));
    }
    for (name, times) in candidates {
        let u = judge.estimate(&model, &Design::Times(times.clone()), 99)?;
        println!("{name:>22} {times:?}: {:.4} ± {:.4}", u.value, u.std_error);
    }
    Ok(())
}

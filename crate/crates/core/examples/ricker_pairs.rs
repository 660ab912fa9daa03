//! Rank all 78 pairs of Ricker summary statistics by LB-KLD and by
//! D-posterior precision.
//!
//! cargo run --release --example ricker_pairs

use lbkld::estimators::{AbcConfig, Estimator, LbkldConfig};
use lbkld::models::RickerModel;
use lbkld::optimize::{sweep, DesignSpec};

fn main() -> lbkld::Result<()> {
    let model = RickerModel::default();
    let pairs = DesignSpec::IndexPairs { m: 13 };
    let estimators = [
        Estimator::LbkldPartition(LbkldConfig {
            n: 5000,
            partitions: 5,
            n_min: 50,
            replications: 10,
            ..Default::default()
        }),
        Estimator::DPosterior(AbcConfig {
            n_outer: 200,
            ..Default::default()
        }),
    ];
    for e in &estimators {
        let s = sweep(&model, &pairs, e, 1)?;
        let mut rows: Vec<_> = s.rows.iter().collect();
        rows.sort_by(|a, b| b.value.total_cmp(&a.value));
        println!("{}:", e.kind().as_str());
        for r in rows.iter().take(5) {
            println!("  {} {:.4} ± {:.4}", r.design, r.value, r.std_error);
        }
    }
    Ok(())
}

//! ABC posteriors of the toy model at d = 5 and d = 100 for a true value of
//! 0.5, drawn as text histograms.
//!
//! cargo run --release --example toy_posterior

use lbkld::estimators::{abc_rejection, AbcPool};
use lbkld::models::{toy_simulate, Design, ToyModel};
use lbkld::StreamKey;

fn main() -> lbkld::Result<()> {
    let designs = [Design::Scalar(5.0), Design::Scalar(100.0)];
    let key = StreamKey::new(7);
    let pools = AbcPool::simulate(&ToyModel::default(), &designs, 100_000, key.child(0))?;
    let mut rng = key.child(1).rng();
    for (pool, d) in pools.iter().zip(&designs) {
        let y = toy_simulate(0.5, d.coords()[0], &mut rng)?;
        let post = abc_rejection(pool, &[y], 1000)?;
        let mut bins = [0usize; 25];
        for &t in post.as_slice() {
            bins[((t * 25.0) as usize).min(24)] += 1;
        }
        println!("d = {d}, y_obs = {y:.4}");
        for (i, c) in bins.iter().enumerate() {
            println!("{:>5.2} {}", (i as f64 + 0.5) / 25.0, "#".repeat(c / 5));
        }
        println!();
    }
    Ok(())
}

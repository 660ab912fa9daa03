//! Nearest-neighbour entropy against closed forms.
//!
//! cargo run --release --example entropy_oracles

use lbkld::entropy::{knn_entropy, SampleBatch};
use lbkld::StreamKey;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() {
    let mut rng = StreamKey::new(1).rng();
    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "n", "N(0,1)", "U[0,1]", "N(0,I2)"
    );
    for n in [100, 1000, 10_000, 100_000] {
        let normal: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let uniform: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let normal2: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
        let h = |v, dim| {
            knn_entropy(&SampleBatch::new(v, dim).unwrap(), 3)
                .unwrap()
                .value
        };
        println!(
            "{n:>6} {:>12.5} {:>12.5} {:>12.5}",
            h(normal, 1),
            h(uniform, 1),
            h(normal2, 2)
        );
    }
    let e = std::f64::consts::E;
    let tau = 2.0 * std::f64::consts::PI;
    println!(
        "{:>6} {:>12.5} {:>12.5} {:>12.5}",
        "exact",
        0.5 * (tau * e).ln(),
        0.0,
        (tau * e).ln()
    );
}

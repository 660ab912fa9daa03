//! Size-constrained k-means on three blobs of unequal size.
//!
//! cargo run --release --example constrained_kmeans

use lbkld::entropy::SampleBatch;
use lbkld::partition::constrained_kmeans;
use lbkld::StreamKey;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> lbkld::Result<()> {
    let mut rng = StreamKey::new(3).rng();
    let mut data = Vec::new();
    for (centre, count) in [(0.0, 200), (6.0, 60), (12.0, 15)] {
        for _ in 0..count {
            data.push(centre + rng.sample::<f64, _>(StandardNormal));
        }
    }
    let points = SampleBatch::new(data, 1)?;
    for n_min in [0, 40, 80] {
        let km = constrained_kmeans(&points, 3, n_min, &mut StreamKey::new(4).rng())?;
        let mut sizes = [0; 3];
        for &l in &km.labels {
            sizes[l] += 1;
        }
        println!(
            "n_min {n_min:>2}: sizes {sizes:?}, centroids {:.2?}, {} iterations, SSE {:.1}",
            km.centroids,
            km.iterations,
            km.sse_trace.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}

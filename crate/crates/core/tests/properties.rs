use lbkld::entropy::{jitter, knn_entropy, SampleBatch};
use lbkld::estimators::{EstimatorKind, UtilityEstimate};
use lbkld::models::Design;
use lbkld::optimize::{
    argmax, project_sorted, spsa_maximize, sweep_designs, DesignSpec, SpsaConfig,
};
use lbkld::partition::{constrained_kmeans, partition_prior, within_cluster_sse};
use lbkld::StreamKey;
use proptest::prelude::*;

fn batch(rows: usize, dim: usize) -> impl Strategy<Value = SampleBatch> {
    prop::collection::vec(-50.0f64..50.0, rows * dim)
        .prop_map(move |v| SampleBatch::new(v, dim).unwrap())
}

fn row(d: &Design, value: f64) -> UtilityEstimate {
    UtilityEstimate {
        design: d.clone(),
        kind: EstimatorKind::LbkldPartition,
        value,
        std_error: 0.0,
        n_sims: 0,
        replications: 1,
        replicates: vec![value],
        floored: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kmeans_respects_sizes_and_descends(
        (points, clusters, n_min) in (1usize..=3, 1usize..=5, 0usize..=12).prop_flat_map(|(dim, l, m)| {
            let n_lo = l * m.max(1);
            (n_lo..n_lo + 80).prop_flat_map(move |n| (batch(n, dim), Just(l), Just(m)))
        }),
        seed in any::<u64>(),
    ) {
        let a = constrained_kmeans(&points, clusters, n_min, &mut StreamKey::new(seed).rng()).unwrap();
        let b = constrained_kmeans(&points, clusters, n_min, &mut StreamKey::new(seed).rng()).unwrap();
        prop_assert_eq!(&a.labels, &b.labels);
        let mut counts = vec![0; clusters];
        for &l in &a.labels {
            prop_assert!(l < clusters);
            counts[l] += 1;
        }
        prop_assert!(counts.iter().all(|&c| c >= n_min));
        prop_assert!(a.sse_trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(a.iterations <= 100);
        let sse = within_cluster_sse(&points, &a.labels, &a.centroids);
        prop_assert!(sse.is_finite());
    }

    #[test]
    fn partition_weights_are_count_fractions(points in batch(60, 2), seed in any::<u64>()) {
        let theta = points.map(|x| x * 2.0);
        let p = partition_prior(&theta, &points, 4, 5, &mut StreamKey::new(seed).rng()).unwrap();
        let mut all: Vec<usize> = p.groups.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..60).collect::<Vec<_>>());
        for (c, w) in p.counts.iter().zip(&p.weights) {
            prop_assert_eq!(*w, *c as f64 / 60.0);
        }
    }

    #[test]
    fn projection_is_sorted_and_boxed(mut x in prop::collection::vec(-100.0f64..150.0, 1..6)) {
        project_sorted(&mut x, 0.0, 50.0);
        prop_assert!(x.iter().all(|v| (0.0..=50.0).contains(v)));
        prop_assert!(x.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn index_pairs_enumerate_all_pairs(m in 2usize..20) {
        let pairs = DesignSpec::IndexPairs { m }.enumerate().unwrap();
        prop_assert_eq!(pairs.len(), m * (m - 1) / 2);
        prop_assert!(pairs.iter().all(|p| p[0] < p[1] && p[1] <= m as f64));
    }

    #[test]
    fn scalar_grid_is_inclusive(lo in -10.0f64..10.0, width in 0.1f64..100.0, points in 2usize..60) {
        let hi = lo + width;
        let g = DesignSpec::ScalarInterval { lo, hi, grid_points: points }.enumerate().unwrap();
        prop_assert_eq!(g.len(), points);
        prop_assert_eq!(g[0][0], lo);
        prop_assert_eq!(g[points - 1][0], hi);
        prop_assert!(g.windows(2).all(|w| w[0][0] < w[1][0]));
    }

    #[test]
    fn sweep_keeps_order_and_finds_the_maximum(values in prop::collection::vec(-5i32..5, 1..40)) {
        let designs: Vec<Design> = (0..values.len()).map(|i| Design::Scalar(i as f64)).collect();
        let res = sweep_designs(&designs, |chunk| {
            Ok(chunk.iter().map(|d| row(d, values[d.coords()[0] as usize] as f64)).collect())
        }).unwrap();
        prop_assert_eq!(res.rows.len(), designs.len());
        let best = *values.iter().max().unwrap();
        let first = values.iter().position(|&v| v == best).unwrap();
        prop_assert_eq!(res.argmax, first);
        prop_assert_eq!(argmax(&res.rows), Some(first));
    }

    #[test]
    fn jitter_stays_within_half_a_cell(points in batch(40, 2), scale in 0.0f64..3.0, seed in any::<u64>()) {
        let j = jitter(&points, scale, &mut StreamKey::new(seed).rng()).unwrap();
        for (a, b) in points.as_slice().iter().zip(j.as_slice()) {
            prop_assert!((a - b).abs() <= scale / 2.0 + 1e-12);
        }
    }

    #[test]
    fn entropy_is_finite_on_integer_data(v in prop::collection::vec(0u8..4, 20..80)) {
        let data: Vec<f64> = v.into_iter().map(f64::from).collect();
        let b = SampleBatch::new(data, 1).unwrap();
        prop_assert!(knn_entropy(&b, 3).unwrap().value.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spsa_is_reproducible_and_feasible(seed in any::<u64>(), k in 1usize..5) {
        let f = |x: &[f64], crn: u64| -> lbkld::Result<f64> {
            let noise = (crn % 1000) as f64 * 1e-4;
            Ok(-x.iter().enumerate().map(|(i, v)| (v - 10.0 * (i + 1) as f64).powi(2)).sum::<f64>() + noise)
        };
        let cfg = SpsaConfig { iterations: 40, ..Default::default() };
        let a = spsa_maximize(f, k, 0.0, 50.0, 0.1, &cfg, seed).unwrap();
        let b = spsa_maximize(f, k, 0.0, 50.0, 0.1, &cfg, seed).unwrap();
        prop_assert_eq!(&a.design, &b.design);
        prop_assert_eq!(&a.trace, &b.trace);
        for s in &a.trace {
            prop_assert!(s.design.iter().all(|v| (0.0..=50.0).contains(v)));
            prop_assert!(s.design.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

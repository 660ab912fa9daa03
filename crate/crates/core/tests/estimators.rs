use lbkld::entropy::{knn_entropy, SampleBatch};
use lbkld::estimators::{
    d_posterior_precision, lbkld_estimate, lbkld_nopartition, nested_mc_kld, replicate_inference,
    AbcConfig, LbkldConfig, NestedMcConfig,
};
use lbkld::models::{Design, GaussianLocationModel, SimulationModel, ToyModel};
use lbkld::partition::partition_prior;
use lbkld::{Error, Result, SimRng, StreamKey};
use rand::Rng;
use rand_distr::StandardNormal;

/// `y ~ N(0, 1)` whatever `θ` is.
struct Uninformative;

impl SimulationModel for Uninformative {
    fn name(&self) -> &str {
        "uninformative"
    }
    fn theta_dim(&self) -> usize {
        1
    }
    fn dim_y(&self, _: &Design) -> Result<usize> {
        Ok(1)
    }
    fn check_design(&self, _: &Design) -> Result<()> {
        Ok(())
    }
    fn design_from_coords(&self, c: &[f64]) -> Result<Design> {
        Ok(Design::Scalar(c[0]))
    }
    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64> {
        vec![rng.sample(StandardNormal)]
    }
    fn simulate(&self, _: &[f64], _: &Design, rng: &mut SimRng) -> Result<Vec<f64>> {
        Ok(vec![rng.sample(StandardNormal)])
    }
    fn log_likelihood(&self, y: &[f64], _: &[f64], _: &Design) -> Option<f64> {
        Some(-0.5 * y[0] * y[0] - 0.5 * (2.0 * std::f64::consts::PI).ln())
    }
}

/// Observes the parameter exactly.
struct Identity;

impl SimulationModel for Identity {
    fn name(&self) -> &str {
        "identity"
    }
    fn theta_dim(&self) -> usize {
        2
    }
    fn dim_y(&self, _: &Design) -> Result<usize> {
        Ok(2)
    }
    fn check_design(&self, _: &Design) -> Result<()> {
        Ok(())
    }
    fn design_from_coords(&self, c: &[f64]) -> Result<Design> {
        c.first()
            .map(|&d| Design::Scalar(d))
            .ok_or_else(|| Error::Domain("empty design".into()))
    }
    fn prior_sample(&self, rng: &mut SimRng) -> Vec<f64> {
        vec![rng.random(), rng.random()]
    }
    fn simulate(&self, theta: &[f64], _: &Design, _: &mut SimRng) -> Result<Vec<f64>> {
        Ok(theta.to_vec())
    }
}

#[test]
fn nested_mc_matches_gaussian_closed_form() {
    let model = GaussianLocationModel::default();
    let cfg = NestedMcConfig {
        n: 10_000,
        n_inner: 1000,
        replications: 1,
    };
    let u = nested_mc_kld(&model, &Design::Scalar(0.0), &cfg, 3).unwrap();
    assert!((u.value - 0.5 * 2f64.ln()).abs() < 0.03, "{}", u.value);
    assert_eq!(u.n_sims, 10_000);
}

#[test]
fn nested_mc_is_zero_without_information() {
    let cfg = NestedMcConfig {
        n: 2000,
        n_inner: 200,
        replications: 1,
    };
    let u = nested_mc_kld(&Uninformative, &Design::Scalar(0.0), &cfg, 8).unwrap();
    assert!(u.value.abs() < 1e-12, "{}", u.value);
}

#[test]
fn unpartitioned_bound_on_gaussian_model() {
    let model = GaussianLocationModel::default();
    let cfg = LbkldConfig {
        n: 5000,
        replications: 20,
        ..Default::default()
    };
    let u = lbkld_nopartition(&model, &Design::Scalar(0.0), &cfg, 4).unwrap();
    assert!(
        (u.value - model.exact_utility()).abs() < 0.05,
        "{}",
        u.value
    );
    assert_eq!(u.n_sims, 3 * 5000 * 20);
}

#[test]
fn one_partition_equals_no_partition_bitwise() {
    let model = ToyModel::default();
    let cfg = LbkldConfig {
        n: 800,
        partitions: 1,
        replications: 3,
        ..Default::default()
    };
    let d = Design::Scalar(12.0);
    let a = lbkld_estimate(&model, &d, &cfg, 17).unwrap();
    let b = lbkld_nopartition(&model, &d, &cfg, 17).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn lbkld_and_nested_mc_agree_near_toy_optimum() {
    let model = ToyModel::default();
    let d = Design::Scalar(5.0);
    let lb = lbkld_estimate(
        &model,
        &d,
        &LbkldConfig {
            n: 10_000,
            replications: 20,
            ..Default::default()
        },
        1,
    )
    .unwrap();
    let nmc = nested_mc_kld(
        &model,
        &d,
        &NestedMcConfig {
            n: 10_000,
            n_inner: 1000,
            replications: 1,
        },
        2,
    )
    .unwrap();
    let se = (lb.std_error.powi(2) + nmc.std_error.powi(2)).sqrt();
    assert!((lb.value - nmc.value).abs() < 2.0 * se, "{lb:?} {nmc:?}");
}

#[test]
fn partition_groups_are_narrower_than_the_prior() {
    let model = ToyModel::default();
    let d = Design::Scalar(5.0);
    let key = StreamKey::new(6);
    let mut thetas = Vec::new();
    let mut ys = Vec::new();
    for i in 0..10_000 {
        let mut rng = key.child(i).rng();
        let t = model.prior_sample(&mut rng);
        ys.push(model.simulate(&t, &d, &mut rng).unwrap());
        thetas.push(t);
    }
    let theta = SampleBatch::from_rows(&thetas).unwrap();
    let y = SampleBatch::from_rows(&ys).unwrap();
    let part = partition_prior(&theta, &y, 5, 10, &mut key.child(u64::MAX).rng()).unwrap();
    let var = |idx: &mut dyn Iterator<Item = usize>| {
        let v: Vec<f64> = idx.map(|i| ys[i][0]).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    };
    let full = var(&mut (0..ys.len()));
    assert_eq!(part.counts.iter().sum::<usize>(), 10_000);
    assert_eq!(part.weights.iter().sum::<f64>(), 1.0);
    for g in &part.groups {
        assert!(g.len() >= 10);
        assert!(var(&mut g.iter().copied()) < full);
    }
}

#[test]
fn one_parameter_precision_is_inverse_variance() {
    let cfg = AbcConfig {
        n_sim: 2000,
        n_keep: 50,
        n_outer: 1,
        ..Default::default()
    };
    let model = ToyModel::default();
    let u = d_posterior_precision(&model, &Design::Scalar(10.0), &cfg, 4).unwrap();
    assert!(u.value > 1.0 && u.value.is_finite());
    assert_eq!(u.n_sims, 2001);
}

#[test]
fn identity_model_is_recovered_by_abc() {
    let cfg = AbcConfig {
        n_sim: 20_000,
        n_keep: 1,
        ..Default::default()
    };
    let study = replicate_inference(&Identity, &[Design::Scalar(0.0)], &cfg, 100, 9)
        .unwrap()
        .remove(0);
    assert_eq!(study.trials.len(), 100);
    for t in &study.trials {
        for (a, b) in t.theta_true.iter().zip(&t.posterior_mean) {
            assert!((a - b).abs() < 0.05);
        }
    }
    assert!(study.mse.iter().all(|&m| m < 1e-3), "{:?}", study.mse);
}

#[test]
fn entropy_error_shrinks_with_sample_size() {
    let truth = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    let err = |n: usize| {
        (0..20u64)
            .map(|s| {
                let mut rng = StreamKey::new(s).child(n as u64).rng();
                let xs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                (knn_entropy(&SampleBatch::new(xs, 1).unwrap(), 3)
                    .unwrap()
                    .value
                    - truth)
                    .abs()
            })
            .sum::<f64>()
            / 20.0
    };
    let (small, large) = (err(500), err(5000));
    assert!(large < small, "{small} -> {large}");
}

use logcorr::rng::RngStream;
use logcorr::samples::SampleMatrix;
use logcorr::stats::{empirical_chf, mean_se, EstimateReport};
use proptest::prelude::*;

#[test]
fn streams_are_keyed_by_path() {
    let mut a = RngStream::new(1, 2, 3);
    let mut b = RngStream::new(1, 2, 3);
    let xa: Vec<f64> = (0..10).map(|_| a.uniform()).collect();
    let xb: Vec<f64> = (0..10).map(|_| b.uniform()).collect();
    assert_eq!(xa, xb);
    let mut c = a.fork(4);
    assert_eq!(c.path(), (1, 2, 4));
    assert_ne!(c.uniform(), RngStream::new(1, 2, 3).uniform());
}

#[test]
fn stable_variates_have_the_right_characteristic_function() {
    let mut rng = RngStream::new(99, 0, 0);
    for alpha in [0.7, 1.0, 1.5, 2.0] {
        let x: Vec<f64> = (0..40_000).map(|_| rng.sas(alpha).unwrap()).collect();
        for p in empirical_chf(&x, &[0.5, 1.0]).unwrap() {
            let target = (-p.theta.powf(alpha)).exp();
            assert!((p.re - target).abs() < 4.5 * p.se_re, "α={alpha} θ={}: {} vs {target}", p.theta, p.re);
        }
    }
}

#[test]
fn subordinator_laplace_transform() {
    let mut rng = RngStream::new(5, 0, 0);
    let (beta, r) = (0.6, 1.3);
    let y: Vec<f64> = (0..40_000).map(|_| (-rng.subordinator(beta, r).unwrap()).exp()).collect();
    let (m, se) = mean_se(&y).unwrap();
    assert!((m - (-r).exp()).abs() < 4.5 * se);
}

#[test]
fn poisson_and_binomial_means() {
    let mut rng = RngStream::new(8, 1, 0);
    for lambda in [0.3, 7.0, 250.0] {
        let x: Vec<f64> = (0..20_000).map(|_| rng.poisson(lambda) as f64).collect();
        let (m, se) = mean_se(&x).unwrap();
        assert!((m - lambda).abs() < 4.5 * se);
    }
    let x: Vec<f64> = (0..20_000).map(|_| rng.binomial(1000, 0.37) as f64).collect();
    let (m, se) = mean_se(&x).unwrap();
    assert!((m - 370.0).abs() < 4.5 * se);
}

proptest! {
    #[test]
    fn csv_round_trips(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 2..40)) {
        let n = values.len() / 2 * 2;
        let m = SampleMatrix::new(vec!["a".into(), "b,c".into()], values[..n].to_vec(), serde_json::Value::Null).unwrap();
        let text = m.to_csv();
        let mut lines = text.lines();
        prop_assert_eq!(lines.next(), Some("a,\"b,c\""));
        let parsed: Vec<f64> = lines.flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>()).collect();
        prop_assert_eq!(parsed, values[..n].to_vec());
    }

    #[test]
    fn report_round_trips(est in -1e6f64..1e6, se in 0.0f64..10.0, target in -1e6f64..1e6, seed in any::<u64>()) {
        let r = EstimateReport::new("x", est, se, 10, seed, serde_json::json!({"kind": "t"})).with_target(target);
        let back: EstimateReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn uniforms_stay_in_range(seed in any::<u64>(), rep in any::<u64>()) {
        let mut rng = RngStream::new(seed, rep, 0);
        for _ in 0..50 {
            let u = rng.uniform_open();
            prop_assert!(u > 0.0 && u < 1.0);
        }
    }
}

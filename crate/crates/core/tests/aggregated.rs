use std::f64::consts::LN_2;

use logcorr::aggregated::{
    clt_report, exact_psi_second_moment, exact_variance_G_n, exact_variance_general_sphere, f_cell_weights,
    psi_second_moment_from_weights, simulate_G_n, simulate_general_G_n, AggregatedPlan, CltReport, LayerMethod,
};
use logcorr::acceptance::{continuum_indicator_moment, enumerate_psi_second_moment};
use logcorr::space::{Space, SphereMode};
use logcorr::stats::variance_se;
use logcorr::testfn::TestFunction;
use proptest::prelude::*;

fn ind() -> TestFunction {
    TestFunction::indicator(0.0, 1.0).unwrap()
}

#[test]
fn variance_approaches_two_log_two() {
    let a = exact_variance_G_n(&ind(), 256).unwrap();
    let b = exact_variance_G_n(&ind(), 1024).unwrap();
    assert!(a < b && b < 2.0 * LN_2);
    assert!((b - 2.0 * LN_2).abs() < 0.01);
    let e = exact_variance_G_n(&TestFunction::exp(1.0).unwrap(), 1024).unwrap();
    assert!((e - 1.0).abs() < 0.01);
}

#[test]
fn second_moment_against_continuum() {
    let n = 1 << 12;
    for r in [0.5, 3.0] {
        let v = exact_psi_second_moment(&ind(), n, r / n as f64).unwrap();
        assert!((v - continuum_indicator_moment(r)).abs() < 5e-3);
    }
}

#[test]
fn layer_methods_share_the_exact_variance() {
    let mut plan = AggregatedPlan::new(32, 640, vec![ind()]);
    plan.reps = 3000;
    plan.seed = 5;
    let exact = exact_variance_G_n(&ind(), 32).unwrap();
    for method in [LayerMethod::Blocks, LayerMethod::Jumps, LayerMethod::Sequential] {
        plan.method = method;
        let m = simulate_G_n(&plan).unwrap();
        let (v, se) = variance_se(&m.column(0)).unwrap();
        assert!((v - exact).abs() < 4.5 * se, "{method:?}: {v} ± {se} vs {exact}");
    }
}

#[test]
fn general_model_on_half_line() {
    let mut plan = AggregatedPlan::new(64, 1024, vec![ind()]);
    plan.reps = 2000;
    plan.seed = 12;
    let m = simulate_general_G_n(&plan).unwrap();
    let (v, se) = variance_se(&m.column(0)).unwrap();
    assert!((v - 2.0 * LN_2).abs() < 4.5 * se + 0.03, "{v} ± {se}");
}

#[test]
fn sphere_exact_variance_matches_quadrature() {
    let sp = Space::sphere(2, SphereMode::RotationInvariant).unwrap();
    let v = exact_variance_general_sphere(&sp, &TestFunction::cap(1.0).unwrap(), 16, 1024).unwrap();
    assert!((v - 0.749948824574).abs() < 0.01, "{v}");
}

#[test]
fn plans_and_reports_round_trip() {
    let mut plan = AggregatedPlan::new(16, 64, vec![ind(), TestFunction::exp(2.0).unwrap()]);
    plan.reps = 50;
    plan.method = LayerMethod::Jumps;
    let json = serde_json::to_string(&plan).unwrap();
    let back: AggregatedPlan = serde_json::from_str(&json).unwrap();
    assert_eq!(back, plan);
    assert!(plan.regime_warning().is_some());

    let m = simulate_G_n(&plan).unwrap();
    let r = clt_report(&plan, &m, 1, Some(0.5), None).unwrap();
    let back: CltReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!("blocks".parse::<LayerMethod>().unwrap(), LayerMethod::Blocks);
    assert!("fast".parse::<LayerMethod>().is_err());
}

#[test]
fn invalid_plans() {
    let mut plan = AggregatedPlan::new(16, 64, vec![ind()]);
    plan.alpha = 2.5;
    assert!(simulate_G_n(&plan).is_err());
    let mut plan = AggregatedPlan::new(16, 64, vec![ind()]);
    plan.space = Space::euclidean(2).unwrap();
    assert!(simulate_general_G_n(&plan).is_err());
    plan.space = Space::FullLine;
    assert!(simulate_G_n(&plan).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_enumeration(w in prop::collection::vec(-3.0f64..3.0, 1..10), r in 0.0f64..=1.0) {
        let a = psi_second_moment_from_weights(&w, r).unwrap();
        let b = enumerate_psi_second_moment(&w, r);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn second_moment_scales_quadratically(w in prop::collection::vec(-3.0f64..3.0, 1..20), r in 0.01f64..0.99, c in -4.0f64..4.0) {
        let a = psi_second_moment_from_weights(&w, r).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| c * v).collect();
        let b = psi_second_moment_from_weights(&scaled, r).unwrap();
        prop_assert!((b - c * c * a).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn cell_weights_integrate_f(a in 0.0f64..2.0, w in 0.01f64..3.0, n in 1usize..200) {
        let f = TestFunction::indicator(a, a + w).unwrap();
        let cells = f_cell_weights(&f, n).unwrap();
        let total: f64 = cells.iter().sum();
        prop_assert!((total - w).abs() < 1e-12 * (1.0 + w));
    }
}

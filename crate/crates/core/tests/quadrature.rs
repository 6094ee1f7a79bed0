use std::f64::consts::{LN_2, PI};

use logcorr::quadrature::{
    cov_functional, ein, exp_integral_e1, frullani_truncated, truncated_cov, QuadratureSettings,
};
use logcorr::space::{Space, SphereMode};
use logcorr::testfn::TestFunction;
use proptest::prelude::*;

fn st() -> QuadratureSettings {
    QuadratureSettings::default()
}

fn f(s: &str) -> TestFunction {
    s.parse().unwrap()
}

#[test]
fn indicator_on_half_line() {
    let v = cov_functional(&Space::HalfLine, 0.5, &f("indicator:0,1"), &f("indicator:0,1"), &st()).unwrap();
    assert!((v - 2.0 * LN_2).abs() < 1e-6);
}

#[test]
fn exponential_on_half_line() {
    // ∬ e^{−s−t} ln((s + t)/|s − t|) = 1.
    let v = cov_functional(&Space::HalfLine, 0.5, &f("exp:1"), &f("exp:1"), &st()).unwrap();
    assert!((v - 1.0).abs() < 1e-8, "{v}");
}

#[test]
fn full_line_cross_support() {
    let v = cov_functional(&Space::FullLine, 0.5, &f("indicator:-1,0"), &f("indicator:0,1"), &st()).unwrap();
    assert!(v.abs() < 1e-8);
}

#[test]
fn rotation_invariant_sphere() {
    let sp = Space::sphere(2, SphereMode::RotationInvariant).unwrap();
    // Frozen from an independent high-precision computation.
    let cap = cov_functional(&sp, 0.5, &f("cap:1"), &f("cap:1"), &st()).unwrap();
    assert!((cap - 0.749948824574).abs() < 1e-8, "{cap}");
    // Whole sphere: π²(ln π − ½∫_0^π ln(d) sin(d) dd).
    let whole = TestFunction::cap(PI).unwrap();
    let v = cov_functional(&sp, 0.5, &whole, &whole, &st()).unwrap();
    assert!((v - 8.1339241185875917275).abs() < 1e-7, "{v}");
}

#[test]
fn euclidean_functionals_are_unsupported() {
    let sp = Space::euclidean(2).unwrap();
    assert!(cov_functional(&sp, 0.5, &f("indicator:0,1"), &f("indicator:0,1"), &st()).is_err());
}

#[test]
fn exponential_integrals() {
    assert!((exp_integral_e1(1.0).unwrap() - 0.21938393439552027).abs() < 1e-15);
    assert!((exp_integral_e1(1e-6).unwrap() - 13.2382958930625).abs() < 1e-11);
    // Ein(z) = E1(z) + γ + ln z.
    let z = 2.5;
    assert!((ein(z) - (exp_integral_e1(z).unwrap() + 0.5772156649015329 + z.ln())).abs() < 1e-14);
}

#[test]
fn truncated_covariance_tends_to_log() {
    // Off the diagonal G^(ε) → G as ε → 0.
    let g = (3.0f64 / 1.0).ln();
    assert!((truncated_cov(1.0, 2.0, 1e-9).unwrap() - g).abs() < 1e-6);
    assert!(truncated_cov(1.0, 1.0, 1e-2).unwrap() > truncated_cov(1.0, 1.0, 1e-1).unwrap());
}

proptest! {
    #[test]
    fn frullani_limit(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
        let v = frullani_truncated(a, b, f64::INFINITY).unwrap();
        prop_assert!((v - (b / a).ln()).abs() <= 1e-12 * (b / a).ln().abs().max(1.0));
        // Antisymmetric in (a, b) and increasing in T for a < b.
        let t = 1.0 / a.min(b);
        prop_assert!((frullani_truncated(a, b, t).unwrap() + frullani_truncated(b, a, t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn covariance_is_bilinear(c in -3.0f64..3.0, lo in 0.0f64..1.0, w in 0.1f64..2.0) {
        let h = 0.5;
        let a = f("indicator:0,1");
        let b = TestFunction::indicator(lo, lo + w).unwrap();
        let g = f("exp:2");
        let sum = a.scaled(c).plus(&b).unwrap();
        let lhs = cov_functional(&Space::HalfLine, h, &sum, &g, &st()).unwrap();
        let rhs = c * cov_functional(&Space::HalfLine, h, &a, &g, &st()).unwrap()
            + cov_functional(&Space::HalfLine, h, &b, &g, &st()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-7 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }
}

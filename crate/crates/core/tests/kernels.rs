use logcorr::kernels::{
    bifbm_cov, gamma_kernel, gamma_r_kernel, lei_nualart_shift_cov, limit_scaling_check, occupancy_cov,
    subordinated_bifbm_cov, KernelParams,
};
use logcorr::space::{parse_point, Space, SpacePoint, SphereMode};
use logcorr::stats::psd_check;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn hl(t: f64) -> SpacePoint {
    SpacePoint::HalfLine(t)
}

#[test]
fn half_line_values() {
    // ln((1 + 3)/2)
    let g = gamma_kernel(&Space::HalfLine, 0.5, &hl(1.0), &hl(3.0)).unwrap().to_f64();
    assert!((g - 2f64.ln()).abs() < 1e-15);
    // H = 1/4: ln((1 + √3)/√2)
    let g = gamma_kernel(&Space::HalfLine, 0.25, &hl(1.0), &hl(3.0)).unwrap().to_f64();
    assert!((g - ((1.0 + 3f64.sqrt()) / 2f64.sqrt()).ln()).abs() < 1e-14);
    assert!(gamma_kernel(&Space::HalfLine, 0.5, &hl(2.0), &hl(2.0)).unwrap().is_infinite());
}

#[test]
fn full_line_sides_are_independent() {
    let sp = Space::FullLine;
    let g = gamma_kernel(&sp, 0.5, &SpacePoint::FullLine(-1.0), &SpacePoint::FullLine(2.0)).unwrap().to_f64();
    assert!(g.abs() < 1e-15);
}

#[test]
fn bifbm_closed_form() {
    // 2^{−K}((s^{2H} + t^{2H})^K − |t − s|^{2HK}) at H = 1/2, K = 1/2, s = 1, t = 3.
    let p = KernelParams::new(0.5, 0.5).unwrap();
    let v = bifbm_cov(&Space::HalfLine, &p, &hl(1.0), &hl(3.0)).unwrap();
    let expect = 2f64.powf(-0.5) * (4f64.sqrt() - 2f64.sqrt());
    assert!((v - expect).abs() < 1e-14, "{v} vs {expect}");
    // K = 1 and H = 1/2 is Brownian motion: min(s, t).
    let p = KernelParams::new(0.5, 1.0).unwrap();
    assert!((bifbm_cov(&Space::HalfLine, &p, &hl(1.0), &hl(3.0)).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn pinned_sphere_pole_is_origin() {
    let sp = Space::sphere(2, SphereMode::Pinned).unwrap();
    let pole = sp.pole().unwrap();
    let eq = parse_point(&sp, "1,0,0").unwrap();
    let p = KernelParams::new(0.5, 1.0).unwrap();
    assert_eq!(bifbm_cov(&sp, &p, &pole, &eq).unwrap(), 0.0);
}

#[test]
fn occupancy_closed_form_at_level_one() {
    // For j = 1 and s = 1 the integral is 1/t − t/(1 + t)².
    for (t, v) in [(1.0, 0.75), (2.0, 1.0 / 2.0 - 2.0 / 9.0), (4.0, 0.25 - 4.0 / 25.0)] {
        assert!((occupancy_cov(1, 1.0, t).unwrap() - v).abs() < 1e-10, "t={t}");
    }
    assert!(occupancy_cov(0, 1.0, 2.0).is_err());
}

#[test]
fn subordinated_and_shift_identity() {
    let (h, k) = (0.25, 0.5);
    let p = KernelParams::new(h, k).unwrap();
    for (s, t) in [(1.0, 2.0), (0.5, 3.0), (2.0, 2.0)] {
        let b = bifbm_cov(&Space::HalfLine, &p, &hl(s), &hl(t)).unwrap();
        // Subordinated covariance is 2^{2HK}/4 times the bi-fBm covariance.
        let sub = subordinated_bifbm_cov(h, k, s, t).unwrap();
        assert!((sub - 2f64.powf(2.0 * h * k) / 4.0 * b).abs() < 1e-14);
        // fBm with index HK = 2^{K−1} bi-fBm + the shift process at times s^{2H}, t^{2H}.
        let hk = 2.0 * h * k;
        let fbm = 0.5 * (s.powf(hk) + t.powf(hk) - (t - s).abs().powf(hk));
        let shift = lei_nualart_shift_cov(k / 2.0, s.powf(2.0 * h), t.powf(2.0 * h)).unwrap();
        assert!((fbm - (2f64.powf(k - 1.0) * b + shift)).abs() < 1e-14, "s={s} t={t}");
    }
    assert!(subordinated_bifbm_cov(0.25, 1.0, 1.0, 2.0).is_err());
}

#[test]
fn parameter_ranges() {
    assert!(KernelParams::new(0.7, 0.5).is_err());
    assert!(KernelParams::new(0.0, 0.5).is_err());
    assert!(KernelParams::new(0.5, 1.5).is_err());
    assert!(gamma_r_kernel(&Space::HalfLine, 1.5, 1.0, &hl(1.0), &hl(2.0)).is_err());
    assert!(gamma_r_kernel(&Space::HalfLine, 1.0, -1.0, &hl(1.0), &hl(2.0)).is_err());
}

fn unit(v: [f64; 3]) -> Option<Vec<f64>> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect())
}

proptest! {
    #[test]
    fn gamma_is_symmetric(h in 0.01f64..=0.5, x in 0.0f64..50.0, y in 0.0f64..50.0) {
        prop_assume!((x - y).abs() > 1e-9);
        let a = gamma_kernel(&Space::HalfLine, h, &hl(x), &hl(y)).unwrap().to_f64();
        let b = gamma_kernel(&Space::HalfLine, h, &hl(y), &hl(x)).unwrap().to_f64();
        prop_assert_eq!(a, b);
        prop_assert!(a >= -1e-15);
    }

    #[test]
    fn gamma_r_is_nonnegative_on_spheres(
        beta in 0.01f64..=1.0,
        r in 1e-3f64..1e3,
        a in prop::array::uniform3(-1.0f64..1.0),
        b in prop::array::uniform3(-1.0f64..1.0),
        pinned in any::<bool>(),
    ) {
        let (Some(x), Some(y)) = (unit(a), unit(b)) else { return Ok(()); };
        let mode = if pinned { SphereMode::Pinned } else { SphereMode::RotationInvariant };
        let sp = Space::sphere(2, mode).unwrap();
        let v = gamma_r_kernel(&sp, beta, r, &SpacePoint::Sphere(x), &SpacePoint::Sphere(y)).unwrap();
        prop_assert!(v >= -1e-14);
    }

    #[test]
    fn gamma_r_is_nonnegative_in_rn(
        beta in 0.01f64..=1.0,
        r in 1e-3f64..1e3,
        x in prop::collection::vec(-5.0f64..5.0, 3),
        y in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let sp = Space::euclidean(3).unwrap();
        let v = gamma_r_kernel(&sp, beta, r, &SpacePoint::Euclidean(x), &SpacePoint::Euclidean(y)).unwrap();
        prop_assert!(v >= -1e-14);
    }

    #[test]
    fn bifbm_gram_is_psd(h in 0.05f64..=0.5, k in 0.05f64..=1.0, ts in prop::collection::vec(0.01f64..10.0, 2..7)) {
        let p = KernelParams::new(h, k).unwrap();
        let n = ts.len();
        let m = DMatrix::from_fn(n, n, |i, j| bifbm_cov(&Space::HalfLine, &p, &hl(ts[i]), &hl(ts[j])).unwrap());
        let scale = m.diagonal().max();
        prop_assert!(psd_check(&m, 1e-10 * scale.max(1.0)).unwrap().passed);
    }

    #[test]
    fn limit_error_shrinks_linearly(h in 0.1f64..=0.5, x in 0.1f64..10.0, y in 0.1f64..10.0) {
        prop_assume!((x - y).abs() > 0.05);
        let e1 = limit_scaling_check(&Space::HalfLine, h, 1e-3, &hl(x), &hl(y)).unwrap();
        let e2 = limit_scaling_check(&Space::HalfLine, h, 5e-4, &hl(x), &hl(y)).unwrap();
        prop_assume!(e1.abs() > 1e-9);
        prop_assert!((e2 / e1 - 0.5).abs() < 0.05, "{} {}", e1, e2);
    }
}

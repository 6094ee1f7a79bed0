//! Covariance functional of zonal functions on `S²`.
//!
//! With `x` at polar angle `θ` and `y` written in geodesic polar coordinates
//! `(d, ψ)` around `x`, the surface element is `sin d dd dψ`, which cancels the
//! logarithmic singularity of the kernel at `d = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{check_h, pow};
use crate::quadrature::functional::{check_pair, Tracker};
use crate::quadrature::gk::{integrate_breaks, QuadratureSettings};
use crate::space::{Space, SphereMode};
use crate::testfn::TestFunction;

fn polar_of(theta: f64, d: f64, psi_cos: f64) -> f64 {
    let c = theta.cos() * d.cos() + theta.sin() * d.sin() * psi_cos;
    c.clamp(-1.0, 1.0).acos()
}

/// `ψ ∈ [0, π]` at which the point at distance `d` from `x` reaches polar angle `rho`.
fn crossing(theta: f64, d: f64, rho: f64) -> Option<f64> {
    let den = theta.sin() * d.sin();
    if den <= 0.0 {
        return None;
    }
    let c = (rho.cos() - theta.cos() * d.cos()) / den;
    (c > -1.0 && c < 1.0).then(|| c.acos())
}

/// The covariance functional of two zonal functions on `S²`.
pub fn cov_functional_sphere(
    space: &Space,
    h: f64,
    f: &TestFunction,
    g: &TestFunction,
    s: &QuadratureSettings,
) -> Result<f64> {
    check_h(h)?;
    s.validate()?;
    check_pair(space, f, g)?;
    let Space::Sphere { dim, mode } = *space else {
        return Err(Error::Unsupported(format!("sphere quadrature on {space}")));
    };
    if dim != 2 {
        return Err(Error::Unsupported(format!("covariance functional on S^{dim}; only S^2 is implemented")));
    }
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let c = space.lambda_density();
    let p2 = 2.0 * h;
    let rot_const = (2.0 * pow(PI / 2.0, p2)).ln();
    let gbreaks: Vec<f64> = g.breaks().into_iter().filter(|b| *b > 0.0 && *b < PI).collect();
    let mut tpts = vec![0.0, PI];
    tpts.extend(f.breaks().into_iter().filter(|b| *b > 0.0 && *b < PI));
    tpts.sort_by(f64::total_cmp);
    let inner = QuadratureSettings { abs_tol: s.abs_tol * 1e-3, rel_tol: s.rel_tol * 1e-2, ..*s };
    let mid = QuadratureSettings { abs_tol: s.abs_tol * 1e-2, rel_tol: s.rel_tol * 1e-1, ..*s };
    let tr = Tracker::new();

    // ∫_0^π g(θ_y) Γ dψ (the ψ-range [π, 2π] is the mirror image).
    let psi_integral = |theta: f64, d: f64| -> f64 {
        let mut pts = vec![0.0, PI];
        pts.extend(gbreaks.iter().filter_map(|rho| crossing(theta, d, *rho)));
        pts.sort_by(f64::total_cmp);
        match mode {
            SphereMode::RotationInvariant => {
                let gamma = rot_const - p2 * d.ln();
                let gsum: f64 = if all_caps(g) {
                    pts.windows(2)
                        .map(|w| (w[1] - w[0]) * g.eval(polar_of(theta, d, (0.5 * (w[0] + w[1])).cos())))
                        .sum()
                } else {
                    tr.inner(integrate_breaks(|p| g.eval(polar_of(theta, d, p.cos())), &pts, &inner))
                };
                gamma * gsum
            }
            SphereMode::Pinned => tr.inner(integrate_breaks(
                |p| {
                    let ty = polar_of(theta, d, p.cos());
                    let gv = g.eval(ty);
                    if gv == 0.0 {
                        return 0.0;
                    }
                    gv * ((pow(theta, p2) + pow(ty, p2)).ln() - p2 * d.ln())
                },
                &pts,
                &inner,
            )),
        }
    };

    let d_integral = |theta: f64| -> f64 {
        let mut pts = vec![0.0, PI];
        for rho in &gbreaks {
            for b in [(theta - rho).abs(), (theta + rho).min(2.0 * PI - theta - rho)] {
                if b > 0.0 && b < PI {
                    pts.push(b);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        tr.inner(integrate_breaks(|d| d.sin() * 2.0 * psi_integral(theta, d), &pts, &mid))
    };

    let total = tr.outer(integrate_breaks(
        |theta| {
            let fv = f.eval(theta);
            if fv == 0.0 {
                return 0.0;
            }
            2.0 * PI * theta.sin() * fv * d_integral(theta)
        },
        &tpts,
        s,
    ));
    tr.finish(c * c * total, s.abs_tol)
}

fn all_caps(g: &TestFunction) -> bool {
    g.terms().iter().all(|(_, a)| matches!(a, crate::testfn::Atom::Cap { .. }))
}

//! Numerical integration: adaptive Gauss–Kronrod rules, exponential integrals and
//! the singular covariance functionals of the log-correlated field.

mod expint;
mod functional;
mod gk;
mod sphere;

pub use expint::{ein, exp_integral_e1, frullani_truncated, truncated_cov, EULER_GAMMA};
pub use functional::{cov_functional_fubini, cov_functional_line};
pub use gk::{gk15, integrate, integrate_breaks, QuadResult, QuadratureSettings, WGK, XGK};
pub use sphere::cov_functional_sphere;

pub use crate::testfn::{Certificate, TestFunction};

use crate::error::{Error, Result};
use crate::space::Space;

/// `Cov(G(f), G(g))`: the kernel `Γ^H` integrated against `f ⊗ g` and `λ ⊗ λ`.
///
/// Supported on the half-line, the full line and (for zonal functions) on `S²`.
pub fn cov_functional(
    space: &Space,
    h: f64,
    f: &TestFunction,
    g: &TestFunction,
    settings: &QuadratureSettings,
) -> Result<f64> {
    match space {
        Space::HalfLine | Space::FullLine => cov_functional_line(space, h, f, g, settings),
        Space::Sphere { .. } => cov_functional_sphere(space, h, f, g, settings),
        Space::Euclidean { .. } => Err(Error::Unsupported(
            "covariance functionals on R^n are not implemented".into(),
        )),
    }
}

//! Closed-form covariance kernels.
//!
//! Powers with real exponents are evaluated as `exp(p·ln x)` throughout so that
//! cross-checks between kernels are bit-stable.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::QuadratureSettings;
use crate::space::{distance, mu_a, Space, SpacePoint};

/// Parameters of the bi-fractional family: `0 < H ≤ 1/2`, `0 < K ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    h: f64,
    k: f64,
}

impl KernelParams {
    pub fn new(h: f64, k: f64) -> Result<KernelParams> {
        check_h(h)?;
        if !(k > 0.0 && k <= 1.0) {
            return domain(format!("K must lie in (0, 1], got {k}"));
        }
        Ok(KernelParams { h, k })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `β = 2H`.
    pub fn beta(&self) -> f64 {
        2.0 * self.h
    }
}

pub(crate) fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h <= 0.5 {
        Ok(())
    } else {
        domain(format!("H must lie in (0, 1/2], got {h}"))
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        domain(format!("β must lie in (0, 1], got {beta}"))
    }
}

/// A kernel value that is `+∞` on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelValue {
    Finite(f64),
    Infinite,
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, KernelValue::Infinite)
    }

    /// Numeric value with `+∞` on the diagonal.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[inline]
pub(crate) fn pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        if p > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        (p * x.ln()).exp()
    }
}

/// Bi-fBm covariance from the masses `μ(A_x), μ(A_y)` and the distance `d`.
pub fn bifbm_from_masses(h: f64, k: f64, mx: f64, my: f64, d: f64) -> f64 {
    let a = pow(mx, 2.0 * h) + pow(my, 2.0 * h);
    if a == 0.0 {
        return 0.0;
    }
    let la = a.ln();
    let scale = (k * (la - std::f64::consts::LN_2)).exp();
    if d == 0.0 {
        return scale;
    }
    // a^K − b^K = a^K · (−expm1(K ln(b/a))), accurate as K ↓ 0.
    let lb = 2.0 * h * d.ln();
    scale * -(k * (lb - la)).exp_m1()
}

/// `Γ^H` from masses and distance; infinite when `d = 0`.
pub fn gamma_from_masses(h: f64, mx: f64, my: f64, d: f64) -> KernelValue {
    if d == 0.0 {
        return KernelValue::Infinite;
    }
    let a = pow(mx, 2.0 * h) + pow(my, 2.0 * h);
    KernelValue::Finite(a.ln() - 2.0 * h * d.ln())
}

/// `Γ_r^β` from masses and distance.
#[inline]
pub fn gamma_r_from_masses(beta: f64, r: f64, mx: f64, my: f64, d: f64) -> f64 {
    let a = pow(2.0 * d, beta) * r;
    let b = (pow(2.0 * mx, beta) + pow(2.0 * my, beta)) * r;
    0.25 * (-a).exp() * -(-(b - a)).exp_m1()
}

fn masses(space: &Space, x: &SpacePoint, y: &SpacePoint) -> Result<(f64, f64, f64)> {
    Ok((mu_a(space, x)?, mu_a(space, y)?, distance(space, x, y)?))
}

/// Covariance `2^{−K}((μ(A_x)^{2H} + μ(A_y)^{2H})^K − d(x,y)^{2HK})`.
pub fn bifbm_cov(space: &Space, params: &KernelParams, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    let (mx, my, d) = masses(space, x, y)?;
    Ok(bifbm_from_masses(params.h, params.k, mx, my, d))
}

/// Log-correlated kernel `log((μ(A_x)^{2H} + μ(A_y)^{2H}) / d(x,y)^{2H})`.
pub fn gamma_kernel(space: &Space, h: f64, x: &SpacePoint, y: &SpacePoint) -> Result<KernelValue> {
    check_h(h)?;
    let (mx, my, d) = masses(space, x, y)?;
    Ok(gamma_from_masses(h, mx, my, d))
}

/// `¼(e^{−(2d)^β r} − e^{−((2μ(A_x))^β + (2μ(A_y))^β) r})`, nonnegative.
pub fn gamma_r_kernel(space: &Space, beta: f64, r: f64, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    check_beta(beta)?;
    if !(r > 0.0) {
        return domain(format!("r must be > 0, got {r}"));
    }
    let (mx, my, d) = masses(space, x, y)?;
    Ok(gamma_r_from_masses(beta, r, mx, my, d))
}

/// Reconstruct `Γ^{β/2}(x, y)` as `∫_0^∞ 4Γ_r^β/r dr` by quadrature in `ln r`.
pub fn gamma_r_integral(
    space: &Space,
    beta: f64,
    x: &SpacePoint,
    y: &SpacePoint,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_beta(beta)?;
    let (mx, my, d) = masses(space, x, y)?;
    if d == 0.0 {
        return Err(Error::Diagonal);
    }
    let a = pow(2.0 * d, beta);
    let b = pow(2.0 * mx, beta) + pow(2.0 * my, beta);
    // Integrand in u = ln r is negligible outside [ln(1e-18/b), ln(60/a)].
    let lo = (1e-18 / b).ln();
    let hi = (60.0 / a).ln();
    let mid = (1.0 / b).ln().clamp(lo, hi);
    let mid2 = (1.0 / a).ln().clamp(mid, hi);
    integrate_with(|u| 4.0 * gamma_r_from_masses(beta, u.exp(), mx, my, d), &[lo, mid, mid2, hi], settings)
}

fn integrate_with<F: FnMut(f64) -> f64>(f: F, pts: &[f64], s: &QuadratureSettings) -> Result<f64> {
    crate::quadrature::integrate_breaks(f, pts, s).into_result(s.abs_tol)
}

/// `K^{−1}·bifbm_cov − Γ`, which tends to zero as `K ↓ 0` off the diagonal.
pub fn limit_scaling_check(space: &Space, h: f64, k: f64, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    let params = KernelParams::new(h, k)?;
    let (mx, my, d) = masses(space, x, y)?;
    let g = gamma_from_masses(h, mx, my, d).finite().ok_or(Error::Diagonal)?;
    Ok(bifbm_from_masses(params.h, params.k, mx, my, d) / k - g)
}

/// Covariance `½(s^{2H} + t^{2H} − (s+t)^{2H})` of the smooth shift process.
pub fn lei_nualart_shift_cov(h: f64, s: f64, t: f64) -> Result<f64> {
    check_h(h)?;
    if !(s >= 0.0 && t >= 0.0) {
        return domain("times must be >= 0");
    }
    let p = 2.0 * h;
    Ok(0.5 * (pow(s, p) + pow(t, p) - pow(s + t, p)))
}

/// Covariance `(2^{(2H−1)K}/4)((s^{2H} + t^{2H})^K − |t−s|^{2HK})` of the subordinated representation.
pub fn subordinated_bifbm_cov(h: f64, k: f64, s: f64, t: f64) -> Result<f64> {
    check_h(h)?;
    if !(k > 0.0 && k < 1.0) {
        return domain(format!("K must lie in (0, 1), got {k}"));
    }
    if !(s >= 0.0 && t >= 0.0) {
        return domain("times must be >= 0");
    }
    let c = pow(2.0, (2.0 * h - 1.0) * k) / 4.0;
    let p = 2.0 * h;
    Ok(c * (pow(pow(s, p) + pow(t, p), k) - pow((t - s).abs(), p * k)))
}

/// `P(Poisson(λ) = j)`.
pub fn poisson_pmf(j: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let jf = j as f64;
    (-lambda + jf * lambda.ln() - libm::lgamma(jf + 1.0)).exp()
}

/// `∫_0^∞ [pois(j; rs) e^{−r(t−s)} − pois(j; rs) pois(j; rt)] dr/r` for `0 < s ≤ t`.
pub fn occupancy_cov(j: u32, s: f64, t: f64) -> Result<f64> {
    if j == 0 {
        return domain("occupancy covariance needs j >= 1");
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if !(s > 0.0) || t.is_infinite() {
        return domain(format!("need 0 < s <= t < ∞, got s={s}, t={t}"));
    }
    let jf = j as f64;
    let integrand = |u: f64| {
        let r = u.exp();
        let ps = poisson_pmf(j, r * s);
        ps * ((-r * (t - s)).exp() - poisson_pmf(j, r * t))
    };
    // Integrand tail beyond R is below 1e-12 since pois(j; Rs) is.
    let big = (jf + 60.0 + 4.0 * jf.sqrt()) / s;
    let lo = (1e-16 / t).ln();
    let peak_s = (jf / s).ln();
    let peak_t = (jf / t).ln();
    let mut pts = vec![lo, peak_t, peak_s, big.ln()];
    pts.sort_by(f64::total_cmp);
    let st = QuadratureSettings::with_tol(1e-13, 1e-11);
    crate::quadrature::integrate_breaks(integrand, &pts, &st).into_result(st.abs_tol)
}

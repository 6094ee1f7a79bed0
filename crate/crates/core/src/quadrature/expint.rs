//! Exponential integrals and the truncated Frullani integral.

use crate::error::{domain, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Ein(z) = ∫_0^z (1 − e^{−t})/t dt` by its power series; used for `z ≤ 1`.
fn ein_series(z: f64) -> f64 {
    let mut term = z;
    let mut sum = z;
    let mut k = 1.0;
    loop {
        k += 1.0;
        term *= -z / k;
        let add = term / k;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            return sum;
        }
    }
}

/// `E1(x) e^{x}` by the modified Lentz continued fraction; used for `x > 1`.
fn e1_scaled_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// The exponential integral `E1(x) = ∫_x^∞ e^{−u}/u du` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("E1 needs x > 0, got {x}"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= 1.0 {
        -EULER_GAMMA - x.ln() + ein_series(x)
    } else {
        e1_scaled_cf(x) * (-x).exp()
    })
}

/// The entire function `Ein(z) = ∫_0^z (1 − e^{−t})/t dt` for `z ≥ 0`.
pub fn ein(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if z <= 1.0 {
        ein_series(z)
    } else if z.is_infinite() {
        f64::INFINITY
    } else {
        e1_scaled_cf(z) * (-z).exp() + EULER_GAMMA + z.ln()
    }
}

/// `∫_0^T (e^{−ar} − e^{−br})/r dr` for `a, b > 0`; `T = ∞` gives `log(b/a)`.
pub fn frullani_truncated(a: f64, b: f64, t: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || a.is_infinite() || b.is_infinite() {
        return domain(format!("Frullani rates must be positive and finite, got a={a}, b={b}"));
    }
    if !(t >= 0.0) {
        return domain(format!("truncation T must be >= 0, got {t}"));
    }
    if a == b || t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok((b / a).ln());
    }
    if a * t > 1.0 && b * t > 1.0 {
        Ok((b / a).ln() + exp_integral_e1(b * t)? - exp_integral_e1(a * t)?)
    } else {
        Ok(ein(b * t) - ein(a * t))
    }
}

/// Covariance `∫_0^{1/ε} (e^{−2r|t−s|} − e^{−2r(t+s)})/r dr` of the truncated field.
pub fn truncated_cov(s: f64, t: f64, eps: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return domain(format!("times must be >= 0, got s={s}, t={t}"));
    }
    if !(eps > 0.0) {
        return domain(format!("truncation ε must be > 0, got {eps}"));
    }
    let a = 2.0 * (t - s).abs();
    let b = 2.0 * (t + s);
    if b == 0.0 {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok(ein(b / eps));
    }
    frullani_truncated(a, b, 1.0 / eps)
}

//! `Cov(G(f), G(g)) = ∬ f(x) g(y) Γ(x, y) λ(dx) λ(dy)` on the line spaces.
//!
//! The product domain is cut into rectangles along a common grid. Off-diagonal
//! rectangles are integrated directly. On a diagonal square the kernel is split
//! as `log(|s|^{2H} + |t|^{2H}) − 2H log|s − t|`; the second part becomes a
//! one-dimensional integral `∫ log|u| C(u) du` against the cross-correlation
//! `C(u) = ∫ f(s) g(s + u) ds`, whose strip around `u = 0` is done by product
//! integration against `log u`.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::kernels::{check_beta, check_h, gamma_r_from_masses, pow};
use crate::quadrature::gk::{integrate_breaks, QuadResult, QuadratureSettings};
use crate::space::Space;
use crate::testfn::TestFunction;

/// Lower and upper ends of the `r`-range used by the Fubini route.
const FUBINI_R: (f64, f64) = (1e-12, 1e6);

pub(crate) struct Tracker {
    err: Cell<f64>,
    failed: Cell<bool>,
}

impl Tracker {
    pub(crate) fn new() -> Tracker {
        Tracker { err: Cell::new(0.0), failed: Cell::new(false) }
    }

    pub(crate) fn inner(&self, r: QuadResult) -> f64 {
        if !r.converged {
            self.failed.set(true);
        }
        r.value
    }

    pub(crate) fn outer(&self, r: QuadResult) -> f64 {
        self.err.set(self.err.get() + r.error);
        self.inner(r)
    }

    pub(crate) fn finish(&self, value: f64, requested: f64) -> Result<f64> {
        if self.failed.get() {
            Err(Error::NoConvergence { value, achieved: self.err.get(), requested })
        } else {
            Ok(value)
        }
    }
}

/// Certified truncation interval of `f` on `space` given the size of the partner function.
pub(crate) fn truncation(f: &TestFunction, g: &TestFunction, space: &Space, s: &QuadratureSettings) -> Option<(f64, f64)> {
    let scale = 10.0 * (1.0 + g.certificate().l1_norm) * 50.0;
    f.support_in(space, s.abs_tol / scale)
}

pub(crate) fn check_pair(space: &Space, f: &TestFunction, g: &TestFunction) -> Result<()> {
    for h in [f, g] {
        h.check_space(space)?;
        let c = h.certificate();
        if !(c.delta > 0.0) || !c.l1_norm.is_finite() {
            return Err(Error::Uncertified(format!("'{}' has no usable decay certificate", h.label())));
        }
    }
    Ok(())
}

/// Common grid: support ends, breaks, the origin and powers of two on both sides.
fn grid(lo: f64, hi: f64, f: &TestFunction, g: &TestFunction) -> Vec<f64> {
    let mut p = vec![lo, hi];
    for b in f.breaks().into_iter().chain(g.breaks()) {
        if b > lo && b < hi {
            p.push(b);
        }
    }
    if lo < 0.0 && hi > 0.0 {
        p.push(0.0);
    }
    let mut x = 1.0;
    while x < hi.max(-lo) {
        for y in [x, -x] {
            if y > lo && y < hi {
                p.push(y);
            }
        }
        x *= 2.0;
    }
    p.sort_by(f64::total_cmp);
    p.dedup();
    p
}

fn overlaps(a: f64, b: f64, sup: Option<(f64, f64)>) -> bool {
    sup.is_some_and(|(lo, hi)| b > lo && a < hi)
}

/// Product integration of `∫_0^w log(u) C(u) du` with `C` interpolated at `0, w/2, w`.
fn log_strip(c0: f64, c1: f64, c2: f64, w: f64) -> f64 {
    let lw = w.ln();
    let m = |k: f64| w.powf(k + 1.0) * (lw / (k + 1.0) - 1.0 / ((k + 1.0) * (k + 1.0)));
    let h = 0.5 * w;
    let a0 = c0;
    let a1 = (-3.0 * c0 + 4.0 * c1 - c2) / (2.0 * h);
    let a2 = (c0 - 2.0 * c1 + c2) / (2.0 * h * h);
    a0 * m(0.0) + a1 * m(1.0) + a2 * m(2.0)
}

/// The covariance functional on the half-line or full line.
pub fn cov_functional_line(
    space: &Space,
    h: f64,
    f: &TestFunction,
    g: &TestFunction,
    s: &QuadratureSettings,
) -> Result<f64> {
    check_h(h)?;
    s.validate()?;
    check_pair(space, f, g)?;
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let (Some(sf), Some(sg)) = (truncation(f, g, space, s), truncation(g, f, space, s)) else {
        return Ok(0.0);
    };
    let lo = sf.0.min(sg.0);
    let hi = sf.1.max(sg.1);
    let p = grid(lo, hi, f, g);
    let p2 = 2.0 * h;
    let gamma = move |x: f64, y: f64| (pow(x.abs(), p2) + pow(y.abs(), p2)).ln() - p2 * (x - y).abs().ln();
    let lpart = move |x: f64, y: f64| (pow(x.abs(), p2) + pow(y.abs(), p2)).ln();

    let mut rects = Vec::new();
    for i in 0..p.len() - 1 {
        for j in 0..p.len() - 1 {
            if overlaps(p[i], p[i + 1], Some(sf)) && overlaps(p[j], p[j + 1], Some(sg)) {
                rects.push((i, j));
            }
        }
    }
    let n = rects.len().max(1) as f64;
    let outer = QuadratureSettings { abs_tol: s.abs_tol / n, ..*s };
    let inner = QuadratureSettings { abs_tol: s.abs_tol / (100.0 * n), rel_tol: s.rel_tol / 100.0, ..*s };
    let tr = Tracker::new();

    let nested = |a: f64, b: f64, c: f64, d: f64, k: &dyn Fn(f64, f64) -> f64| {
        let r = integrate_breaks(
            |x| {
                let fx = f.eval(x);
                if fx == 0.0 {
                    return 0.0;
                }
                fx * tr.inner(integrate_breaks(|y| g.eval(y) * k(x, y), &[c, d], &inner))
            },
            &[a, b],
            &outer,
        );
        tr.outer(r)
    };

    let mut total = 0.0;
    for &(i, j) in &rects {
        let (a, b, c, d) = (p[i], p[i + 1], p[j], p[j + 1]);
        if i != j {
            total += nested(a, b, c, d, &gamma);
            continue;
        }
        let ia = nested(a, b, a, b, &lpart);
        // Cross-correlation restricted to the square.
        let cfg = |u: f64| {
            let lo = a.max(a - u);
            let hi = b.min(b - u);
            if hi <= lo {
                return 0.0;
            }
            tr.inner(integrate_breaks(|x| f.eval(x) * g.eval(x + u), &[lo, hi], &inner))
        };
        let len = b - a;
        let w = s.diagonal_width * len;
        let mut ib = 0.0;
        for sign in [1.0, -1.0] {
            let c = |u: f64| cfg(sign * u);
            ib += log_strip(c(0.0), c(0.5 * w), c(w), w);
            ib += tr.outer(integrate_breaks(|u| u.ln() * c(u), &[w, len], &outer));
        }
        total += ia - p2 * ib;
    }
    tr.finish(total, s.abs_tol)
}

/// `∫_0^∞ (4/r) ∬ f g Γ_r^β dr` on a line space, integrated in `ln r` over a finite range
/// with the leading large-`r` tail added in closed form.
pub fn cov_functional_fubini(
    space: &Space,
    beta: f64,
    f: &TestFunction,
    g: &TestFunction,
    s: &QuadratureSettings,
) -> Result<f64> {
    check_beta(beta)?;
    s.validate()?;
    check_pair(space, f, g)?;
    if !space.is_line() {
        return Err(Error::Unsupported(format!("Fubini route on {space}")));
    }
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let (Some(sf), Some(sg)) = (truncation(f, g, space, s), truncation(g, f, space, s)) else {
        return Ok(0.0);
    };
    let pf = grid(sf.0, sf.1, f, g);
    let inner = QuadratureSettings { abs_tol: s.abs_tol * 1e-3, rel_tol: s.rel_tol * 1e-2, ..*s };
    let mid = QuadratureSettings { abs_tol: s.abs_tol * 1e-2, rel_tol: s.rel_tol * 1e-1, ..*s };
    let tr = Tracker::new();
    let gb = g.breaks();

    let psi = |r: f64| {
        let w = 1.0 / pow(r, 1.0 / beta);
        tr.inner(integrate_breaks(
            |x| {
                let fx = f.eval(x);
                if fx == 0.0 {
                    return 0.0;
                }
                let mut pts = vec![sg.0, sg.1];
                for y in [x - 8.0 * w, x - w, x, x + w, x + 8.0 * w] {
                    if y > sg.0 && y < sg.1 {
                        pts.push(y);
                    }
                }
                pts.extend(gb.iter().copied().filter(|y| *y > sg.0 && *y < sg.1));
                if sg.0 < 0.0 && sg.1 > 0.0 {
                    pts.push(0.0);
                }
                pts.sort_by(f64::total_cmp);
                let k = |y: f64| gamma_r_from_masses(beta, r, x.abs(), y.abs(), (x - y).abs());
                fx * tr.inner(integrate_breaks(|y| g.eval(y) * k(y), &pts, &inner))
            },
            &pf,
            &mid,
        ))
    };
    let (rlo, rhi) = FUBINI_R;
    let mut upts = vec![rlo.ln()];
    let mut u = rlo.ln().ceil();
    while u < rhi.ln() {
        upts.push(u);
        u += 1.0;
    }
    upts.push(rhi.ln());
    let body = tr.outer(integrate_breaks(|u| 4.0 * psi(u.exp()), &upts, s));
    // Large-r tail: ∬ f g Γ_r ≈ ¼ Γ(1+1/β) r^{−1/β} ∫ f g.
    let lo = sf.0.max(sg.0);
    let hi = sf.1.min(sg.1);
    let fg = if hi > lo {
        let mut pts = grid(lo, hi, f, g);
        pts.retain(|x| *x >= lo && *x <= hi);
        tr.inner(integrate_breaks(|x| f.eval(x) * g.eval(x), &pts, &inner))
    } else {
        0.0
    };
    let tail = libm::tgamma(1.0 + 1.0 / beta) * fg * beta * pow(rhi, -1.0 / beta);
    tr.finish(body + tail, s.abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_strip_is_exact_for_quadratics() {
        let w: f64 = 0.3;
        let c = |u: f64| 1.0 + 2.0 * u - 5.0 * u * u;
        // ∫_0^w u^k ln u du = w^{k+1}(ln w/(k+1) − 1/(k+1)²)
        let m = |k: f64| w.powf(k + 1.0) * (w.ln() / (k + 1.0) - 1.0 / ((k + 1.0) * (k + 1.0)));
        let exact = m(0.0) + 2.0 * m(1.0) - 5.0 * m(2.0);
        assert!((log_strip(c(0.0), c(w / 2.0), c(w), w) - exact).abs() < 1e-15);
    }

    #[test]
    fn grid_contains_breaks_and_origin() {
        let f = TestFunction::indicator(-1.5, 0.3).unwrap();
        let g = TestFunction::exp(1.0).unwrap();
        let p = grid(-1.5, 5.0, &f, &g);
        for x in [-1.5, -1.0, 0.0, 0.3, 1.0, 2.0, 4.0, 5.0] {
            assert!(p.contains(&x), "{x} missing from {p:?}");
        }
    }
}

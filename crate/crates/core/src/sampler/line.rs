//! Path functionals `∫ f(t) 1{N(λt) odd} dt` of a rate-`λ` Poisson process on `[0, ∞)`.
//!
//! Step functions are handled exactly interval by interval: given `N` arrivals in
//! an interval, the spacings are exchangeable, so the time spent in the odd state
//! is `len·Beta(#odd spacings, #even spacings)`. Smooth functions use the exact
//! arrival times when few arrivals are expected, and otherwise the same interval
//! scheme on fine cells with `f` replaced by its cell averages.

use crate::quadrature::{integrate_breaks, QuadratureSettings};
use crate::rng::RngStream;
use crate::testfn::TestFunction;

/// Mass of `f` beyond the sampling horizon.
pub(crate) const HORIZON_TOL: f64 = 1e-9;
/// Largest cell of the fine-cell approximation.
pub(crate) const CELL_WIDTH: f64 = 0.05;
/// Allowed oscillation of `f` over one cell, relative to `sup |f|`.
const CELL_OSCILLATION: f64 = 0.02;

/// Interval with per-function constant values.
#[derive(Debug, Clone)]
struct Piece {
    #[cfg_attr(not(test), allow(dead_code))]
    a: f64,
    len: f64,
    vals: Vec<f64>,
    zero: bool,
}

/// Several functions restricted to `[0, ∞)`, prepared for repeated path draws.
#[derive(Debug, Clone)]
pub(crate) struct LineFunctional {
    fs: Vec<TestFunction>,
    horizon: f64,
    exact: Option<Vec<Piece>>,
    cells: Vec<Piece>,
}

fn build_pieces(fs: &[TestFunction], cuts: &[f64], average: bool) -> Vec<Piece> {
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let vals: Vec<f64> = fs
                .iter()
                .map(|f| if average { f.integral(a, b) / (b - a) } else { f.eval(0.5 * (a + b)) })
                .collect();
            let zero = vals.iter().all(|v| *v == 0.0);
            Piece { a, len: b - a, vals, zero }
        })
        .collect()
}

fn oscillation(f: &TestFunction, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=8 {
        let v = f.eval(a + (b - a) * i as f64 / 8.0);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// Cell edges: at most `CELL_WIDTH` wide where any function oscillates by more than
/// `CELL_OSCILLATION·sup|f|`, up to unit width elsewhere.
fn adaptive_cuts(fs: &[TestFunction], breaks: &[f64]) -> Vec<f64> {
    let horizon = *breaks.last().unwrap_or(&0.0);
    let sups: Vec<f64> = fs
        .iter()
        .map(|f| {
            let mut s = breaks.iter().map(|b| f.eval(*b).abs()).fold(0.0, f64::max);
            for i in 0..=4000 {
                s = s.max(f.eval(horizon * i as f64 / 4000.0).abs());
            }
            s
        })
        .collect();
    let mut cuts = vec![breaks[0]];
    for w in breaks.windows(2) {
        let mut cur = w[0];
        while cur < w[1] {
            let mut width = (w[1] - cur).min(1.0);
            while width > CELL_WIDTH
                && fs.iter().zip(&sups).any(|(f, s)| oscillation(f, cur, cur + width) > CELL_OSCILLATION * s)
            {
                width = (width * 0.5).max(CELL_WIDTH);
            }
            cur = if w[1] - (cur + width) < 1e-12 * w[1].max(1.0) { w[1] } else { cur + width };
            cuts.push(cur);
        }
    }
    cuts
}

impl LineFunctional {
    pub(crate) fn new(fs: &[TestFunction]) -> LineFunctional {
        let horizon = fs
            .iter()
            .filter_map(|f| f.support(HORIZON_TOL))
            .map(|(_, hi)| hi.max(0.0))
            .fold(0.0, f64::max);
        let mut breaks: Vec<f64> = vec![0.0, horizon];
        for f in fs {
            breaks.extend(f.breaks().into_iter().filter(|b| *b > 0.0 && *b < horizon));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let exact = fs.iter().all(|f| f.pieces().is_some()).then(|| build_pieces(fs, &breaks, false));
        let cuts = if exact.is_some() { Vec::new() } else { adaptive_cuts(fs, &breaks) };
        let cells = if exact.is_some() { Vec::new() } else { build_pieces(fs, &cuts, true) };
        LineFunctional { fs: fs.to_vec(), horizon, exact, cells }
    }

    #[cfg(test)]
    fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `∫_0^∞ f(t) ½(1 − e^{−(2t)^β r}) dt` for every function.
    pub(crate) fn centering(&self, beta: f64, r: f64) -> Vec<f64> {
        self.fs
            .iter()
            .map(|f| {
                let total = f.integral(0.0, f64::INFINITY);
                if beta == 1.0 {
                    0.5 * (total - f.laplace(2.0 * r))
                } else {
                    0.5 * (total - stretched_laplace(f, self.horizon, beta, r))
                }
            })
            .collect()
    }

    /// Add `∫ f 1{N(λt) odd} dt` for each function to `out`.
    pub(crate) fn draw(&self, rate: f64, rng: &mut RngStream, out: &mut [f64]) {
        if let Some(p) = &self.exact {
            pieces_draw(p, rate, rng, out);
        } else if rate * self.horizon <= (2.5 * self.cells.len() as f64).max(64.0) {
            self.path_draw(rate, rng, out);
        } else {
            pieces_draw(&self.cells, rate, rng, out);
        }
    }

    fn path_draw(&self, rate: f64, rng: &mut RngStream, out: &mut [f64]) {
        if rate <= 0.0 {
            return;
        }
        let mut t = 0.0;
        loop {
            let start = t + rng.exp1() / rate;
            if start >= self.horizon {
                return;
            }
            let end = (start + rng.exp1() / rate).min(self.horizon);
            for (o, f) in out.iter_mut().zip(&self.fs) {
                *o += f.integral(start, end);
            }
            if end >= self.horizon {
                return;
            }
            t = end;
        }
    }
}

fn pieces_draw(pieces: &[Piece], rate: f64, rng: &mut RngStream, out: &mut [f64]) {
    let mut odd = false;
    for p in pieces {
        let mean = rate * p.len;
        if p.zero {
            if rng.bernoulli(-0.5 * (-2.0 * mean).exp_m1()) {
                odd = !odd;
            }
            continue;
        }
        let n = rng.poisson(mean);
        let occ = if n == 0 {
            if odd { p.len } else { 0.0 }
        } else {
            let (k_odd, k_even) = if odd { (n / 2 + 1, n - n / 2) } else { (n - n / 2, n / 2 + 1) };
            let (a, b) = (k_odd as f64, k_even as f64);
            if n < 1 << 30 {
                p.len * rng.beta(a, b)
            } else {
                let m = a / (a + b);
                let sd = (m * (1.0 - m) / (a + b + 1.0)).sqrt();
                p.len * (m + sd * rng.gaussian()).clamp(0.0, 1.0)
            }
        };
        if n % 2 == 1 {
            odd = !odd;
        }
        if occ != 0.0 {
            for (o, v) in out.iter_mut().zip(&p.vals) {
                *o += v * occ;
            }
        }
    }
}

/// `∫_0^T f(t) e^{−(2t)^β r} dt` by quadrature.
fn stretched_laplace(f: &TestFunction, horizon: f64, beta: f64, r: f64) -> f64 {
    if horizon <= 0.0 {
        return 0.0;
    }
    // e^{−(2t)^β r} ≤ 1e-18 beyond t = (41.5/r)^{1/β}/2.
    let cut = (0.5 * (41.5 / r).powf(1.0 / beta)).min(horizon);
    let mut pts = vec![0.0, cut];
    let mut x = cut;
    while x > 1e-12 * cut.max(1.0) {
        x *= 0.125;
        pts.push(x);
    }
    pts.extend(f.breaks().into_iter().filter(|b| *b > 0.0 && *b < cut));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let st = QuadratureSettings::with_tol(1e-13, 1e-11);
    integrate_breaks(|t| f.eval(t) * (-(2.0 * t).powf(beta) * r).exp(), &pts, &st).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_keeps_even_state() {
        let lf = LineFunctional::new(&[TestFunction::indicator(0.0, 1.0).unwrap()]);
        let mut rng = RngStream::new(1, 0, 0);
        let mut out = [0.0];
        lf.draw(0.0, &mut rng, &mut out);
        assert_eq!(out[0], 0.0);
    }

    #[test]
    fn centering_matches_quadrature_for_unit_beta() {
        let f = TestFunction::exp(1.0).unwrap();
        let lf = LineFunctional::new(&[f.clone()]);
        for r in [0.01, 1.0, 50.0] {
            let c = lf.centering(1.0, r)[0];
            let q = 0.5 * (1.0 - stretched_laplace(&f, lf.horizon(), 1.0, r));
            assert!((c - q).abs() < 1e-9, "r={r}: {c} vs {q}");
            assert!((c - 0.5 * (1.0 - 1.0 / (1.0 + 2.0 * r))).abs() < 1e-12);
        }
    }

    #[test]
    fn cells_cover_support() {
        let lf = LineFunctional::new(&[TestFunction::gauss(1.0, 0.5).unwrap()]);
        assert!(lf.exact.is_none());
        let covered: f64 = lf.cells.iter().map(|c| c.len).sum();
        assert!((covered - lf.horizon()).abs() < 1e-9);
        assert!(lf.cells.iter().all(|c| c.len <= 1.0 + 1e-12));
        // Cells stay fine where the function is steep.
        assert!(lf.cells.iter().filter(|c| (c.a - 0.5).abs() < 0.2).all(|c| c.len <= CELL_WIDTH + 1e-12));
    }
}

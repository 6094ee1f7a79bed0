//! Integrable test functions with decay certificates.
//!
//! A [`TestFunction`] is a finite linear combination of atoms. Line atoms live on
//! the real line (restricted to `[0, ∞)` on the half-line); zonal atoms live on a
//! sphere and depend only on the polar angle from the pole.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_breaks, QuadratureSettings};
use crate::space::Space;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Atom {
    /// `1_{[a, b]}`.
    Indicator { a: f64, b: f64 },
    /// `e^{−rate·s}` for `s ≥ 0`, zero for `s < 0`.
    Exp { rate: f64 },
    /// `exp(−(s − center)²/(2 width²))`.
    Gauss { center: f64, width: f64 },
    /// `(1 + s)^{−p}` for `s ≥ 0`, zero for `s < 0`.
    PolyDecay { p: f64 },
    /// Indicator of the polar cap of geodesic radius `radius` around the pole.
    Cap { radius: f64 },
}

/// Decay data certifying membership of `f` in a class `F_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Largest certified `δ`; `∞` for compactly supported or exponentially decaying functions.
    pub delta: f64,
    pub sup_norm: f64,
    pub l1_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    terms: Vec<(f64, Atom)>,
    label: String,
}

impl Atom {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Uncertified(m));
        match *self {
            Atom::Indicator { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                bad(format!("indicator needs finite a < b, got [{a}, {b}]"))
            }
            Atom::Exp { rate } if !(rate > 0.0 && rate.is_finite()) => {
                bad(format!("exp rate must be positive, got {rate}"))
            }
            Atom::Gauss { center, width } if !(center.is_finite() && width > 0.0 && width.is_finite()) => {
                bad(format!("gauss needs finite center and positive width, got ({center}, {width})"))
            }
            Atom::PolyDecay { p } if !(p > 1.0 && p.is_finite()) => {
                bad(format!("polydecay exponent must exceed 1 for integrability, got {p}"))
            }
            Atom::Cap { radius } if !(radius > 0.0 && radius <= PI) => {
                bad(format!("cap radius must lie in (0, π], got {radius}"))
            }
            _ => Ok(()),
        }
    }

    fn is_zonal(&self) -> bool {
        matches!(self, Atom::Cap { .. })
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            Atom::Indicator { a, b } => (x >= a && x <= b) as u8 as f64,
            Atom::Exp { rate } => if x >= 0.0 { (-rate * x).exp() } else { 0.0 },
            Atom::Gauss { center, width } => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp()
            }
            Atom::PolyDecay { p } => if x >= 0.0 { (-p * x.ln_1p()).exp() } else { 0.0 },
            Atom::Cap { radius } => (x <= radius) as u8 as f64,
        }
    }

    /// `∫_a^b` of the atom over the real line.
    fn integral(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match *self {
            Atom::Indicator { a: lo, b: hi } => (b.min(hi) - a.max(lo)).max(0.0),
            Atom::Exp { rate } => {
                let a = a.max(0.0);
                if b <= a {
                    return 0.0;
                }
                (-rate * a).exp() * -(-rate * (b - a)).exp_m1() / rate
            }
            Atom::Gauss { center, width } => {
                let s = width * std::f64::consts::SQRT_2;
                let za = (a - center) / s;
                let zb = (b - center) / s;
                let c = width * (PI / 2.0).sqrt();
                if za >= 0.0 {
                    c * (libm::erfc(za) - libm::erfc(zb))
                } else if zb <= 0.0 {
                    c * (libm::erfc(-zb) - libm::erfc(-za))
                } else {
                    c * (libm::erf(zb) - libm::erf(za))
                }
            }
            Atom::PolyDecay { p } => {
                let a = a.max(0.0);
                if b <= a {
                    return 0.0;
                }
                let q = 1.0 - p;
                ((q * b.ln_1p()).exp() - (q * a.ln_1p()).exp()) / q
            }
            Atom::Cap { .. } => 0.0,
        }
    }

    /// Points where the atom is discontinuous or not smooth.
    fn breaks(&self) -> Vec<f64> {
        match *self {
            Atom::Indicator { a, b } => vec![a, b],
            Atom::Exp { .. } | Atom::PolyDecay { .. } => vec![0.0],
            Atom::Gauss { .. } => vec![],
            Atom::Cap { radius } => vec![radius],
        }
    }

    /// Interval outside of which the atom's `L¹` mass is below `tol`.
    fn support(&self, tol: f64) -> (f64, f64) {
        match *self {
            Atom::Indicator { a, b } => (a, b),
            Atom::Exp { rate } => (0.0, ((1.0 / (rate * tol)).ln() / rate).max(0.0)),
            Atom::Gauss { center, width } => {
                // Two-sided tail mass width·sqrt(2π)·erfc(z/√2) ≤ tol.
                let mut z = 1.0;
                while width * (2.0 * PI).sqrt() * libm::erfc(z / std::f64::consts::SQRT_2) > tol {
                    z += 0.25;
                }
                (center - z * width, center + z * width)
            }
            Atom::PolyDecay { p } => {
                let t = (1.0 / ((p - 1.0) * tol)).powf(1.0 / (p - 1.0)) - 1.0;
                (0.0, t.max(0.0))
            }
            Atom::Cap { radius } => (0.0, radius),
        }
    }

    fn certificate(&self) -> Certificate {
        match *self {
            Atom::Indicator { a, b } => Certificate { delta: f64::INFINITY, sup_norm: 1.0, l1_norm: b - a },
            Atom::Exp { rate } => Certificate { delta: f64::INFINITY, sup_norm: 1.0, l1_norm: 1.0 / rate },
            Atom::Gauss { width, .. } => Certificate {
                delta: f64::INFINITY,
                sup_norm: 1.0,
                l1_norm: width * (2.0 * PI).sqrt(),
            },
            Atom::PolyDecay { p } => {
                let margin = (0.5 * (p - 1.0)).min(0.1);
                Certificate { delta: p - 1.0 - margin, sup_norm: 1.0, l1_norm: 1.0 / (p - 1.0) }
            }
            Atom::Cap { radius } => Certificate {
                delta: f64::INFINITY,
                sup_norm: 1.0,
                l1_norm: 2.0 * PI * (1.0 - radius.cos()),
            },
        }
    }

    fn reflect(&self) -> Option<Atom> {
        match *self {
            Atom::Indicator { a, b } => Some(Atom::Indicator { a: -b, b: -a }),
            Atom::Gauss { center, width } => Some(Atom::Gauss { center: -center, width }),
            Atom::Exp { .. } | Atom::PolyDecay { .. } => None,
            Atom::Cap { .. } => Some(*self),
        }
    }
}

impl TestFunction {
    pub fn atom(atom: Atom) -> Result<TestFunction> {
        atom.validate()?;
        Ok(TestFunction { terms: vec![(1.0, atom)], label: atom_label(&atom) })
    }

    pub fn zero() -> TestFunction {
        TestFunction { terms: vec![], label: "zero".into() }
    }

    pub fn indicator(a: f64, b: f64) -> Result<TestFunction> {
        TestFunction::atom(Atom::Indicator { a, b })
    }

    pub fn exp(rate: f64) -> Result<TestFunction> {
        TestFunction::atom(Atom::Exp { rate })
    }

    pub fn gauss(center: f64, width: f64) -> Result<TestFunction> {
        TestFunction::atom(Atom::Gauss { center, width })
    }

    pub fn polydecay(p: f64) -> Result<TestFunction> {
        TestFunction::atom(Atom::PolyDecay { p })
    }

    pub fn cap(radius: f64) -> Result<TestFunction> {
        TestFunction::atom(Atom::Cap { radius })
    }

    /// `c·f`.
    pub fn scaled(&self, c: f64) -> TestFunction {
        TestFunction {
            terms: self.terms.iter().map(|(w, a)| (w * c, *a)).collect(),
            label: format!("{c}*({})", self.label),
        }
    }

    /// `f + g`. Line and zonal atoms cannot be mixed.
    pub fn plus(&self, other: &TestFunction) -> Result<TestFunction> {
        let zonal = self.terms.iter().chain(&other.terms).map(|(_, a)| a.is_zonal());
        let kinds: Vec<bool> = zonal.collect();
        if kinds.iter().any(|z| *z) && kinds.iter().any(|z| !*z) {
            return Err(Error::Uncertified("cannot add line and sphere functions".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(TestFunction { terms, label: format!("{}+{}", self.label, other.label) })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> TestFunction {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn terms(&self) -> &[(f64, Atom)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(w, _)| *w == 0.0)
    }

    pub fn is_zonal(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|(_, a)| a.is_zonal())
    }

    /// Value at a line coordinate, or at a polar angle for zonal functions.
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(w, a)| w * a.eval(x)).sum()
    }

    /// `∫_a^b f` over the line.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.terms.iter().map(|(w, at)| w * at.integral(a, b)).sum()
    }

    /// Sorted discontinuity and kink locations.
    pub fn breaks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.terms.iter().flat_map(|(_, a)| a.breaks()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Interval carrying all but `tol` of the `L¹` mass; `None` for the zero function.
    pub fn support(&self, tol: f64) -> Option<(f64, f64)> {
        let n = self.terms.len().max(1) as f64;
        self.terms
            .iter()
            .filter(|(w, _)| *w != 0.0)
            .map(|(w, a)| a.support(tol / (n * w.abs())))
            .reduce(|(l1, h1), (l2, h2)| (l1.min(l2), h1.max(h2)))
    }

    /// Support clipped to the domain of `space`.
    pub fn support_in(&self, space: &Space, tol: f64) -> Option<(f64, f64)> {
        let (lo, hi) = self.support(tol)?;
        let lo = if matches!(space, Space::HalfLine) { lo.max(0.0) } else { lo };
        (hi > lo).then_some((lo, hi))
    }

    /// Whether `f` is a step function; returns its pieces `(a, b, value)` when it is.
    pub fn pieces(&self) -> Option<Vec<(f64, f64, f64)>> {
        if self.terms.iter().any(|(_, a)| !matches!(a, Atom::Indicator { .. })) {
            return None;
        }
        let br = self.breaks();
        Some(
            br.windows(2)
                .map(|w| (w[0], w[1], self.eval(0.5 * (w[0] + w[1]))))
                .filter(|p| p.2 != 0.0)
                .collect(),
        )
    }

    pub fn certificate(&self) -> Certificate {
        let mut c = Certificate { delta: f64::INFINITY, sup_norm: 0.0, l1_norm: 0.0 };
        for (w, a) in &self.terms {
            let ca = a.certificate();
            c.delta = c.delta.min(ca.delta);
            c.sup_norm += w.abs() * ca.sup_norm;
            c.l1_norm += w.abs() * ca.l1_norm;
        }
        c
    }

    /// Reject functions that do not belong to the space they are used on.
    pub fn check_space(&self, space: &Space) -> Result<()> {
        for (_, a) in &self.terms {
            a.validate()?;
        }
        match space {
            Space::Sphere { .. } if self.terms.iter().any(|(_, a)| !a.is_zonal()) => Err(Error::Uncertified(
                format!("'{}' is not a zonal sphere function", self.label),
            )),
            Space::Sphere { .. } => Ok(()),
            _ if self.terms.iter().any(|(_, a)| a.is_zonal()) => Err(Error::Uncertified(format!(
                "'{}' is a sphere function, used on {space}",
                self.label
            ))),
            _ => Ok(()),
        }
    }

    /// `x ↦ f(−x)` restricted to `x > 0`, i.e. the negative half of `f` folded over.
    pub fn reflected(&self) -> TestFunction {
        TestFunction {
            terms: self.terms.iter().filter_map(|(w, a)| a.reflect().map(|r| (*w, r))).collect(),
            label: format!("reflect({})", self.label),
        }
    }

    /// Laplace transform `∫_0^∞ f(t) e^{−st} dt` of the restriction to `[0, ∞)`.
    pub fn laplace(&self, s: f64) -> f64 {
        let mut total = 0.0;
        for (w, a) in &self.terms {
            let v = match *a {
                Atom::Indicator { a, b } => {
                    let (a, b) = (a.max(0.0), b.max(0.0));
                    if b <= a {
                        0.0
                    } else if s == 0.0 {
                        b - a
                    } else {
                        (-s * a).exp() * -(-s * (b - a)).exp_m1() / s
                    }
                }
                Atom::Exp { rate } => 1.0 / (rate + s),
                _ => {
                    let f = TestFunction { terms: vec![(1.0, *a)], label: String::new() };
                    numeric_laplace(&f, s)
                }
            };
            total += w * v;
        }
        total
    }

    /// Sampling check of the certificate: the sup-norm bound holds on a fine grid
    /// and the weighted tail moments `∫_1^T s^δ' |f|` stabilize as `T` grows, for δ' below δ.
    pub fn verify_certificate(&self) -> Result<()> {
        let c = self.certificate();
        if self.is_zero() {
            return Ok(());
        }
        let (lo, hi) = if self.is_zonal() { (0.0, PI) } else { self.support(1e-12).unwrap_or((0.0, 1.0)) };
        for i in 0..=10_000 {
            let x = lo + (hi - lo) * i as f64 / 10_000.0;
            if self.eval(x).abs() > c.sup_norm * (1.0 + 1e-12) {
                return Err(Error::Uncertified(format!("sup bound violated at {x}")));
            }
        }
        if self.is_zonal() {
            return Ok(());
        }
        let d = if c.delta.is_finite() { c.delta } else { 1.0 };
        let st = QuadratureSettings::with_tol(1e-12, 1e-10);
        let moment = |t: f64| {
            let mut pts = vec![1.0];
            let mut x = 1.0;
            while x < t {
                x = (x * 4.0).min(t);
                pts.push(x);
            }
            integrate_breaks(|s| s.powf(d) * self.eval(s).abs(), &pts, &st).value
        };
        let (m1, m2, m3) = (moment(1e3), moment(1e6), moment(1e9));
        if !(m3 - m2 <= (m2 - m1).abs() + 1e-9) {
            return Err(Error::Uncertified(format!("tail moment of order {d} does not settle")));
        }
        Ok(())
    }
}

fn numeric_laplace(f: &TestFunction, s: f64) -> f64 {
    let Some((_, hi)) = f.support(1e-14) else { return 0.0 };
    if hi <= 0.0 {
        return 0.0;
    }
    let hi = if s > 0.0 { hi.min(40.0 / s) } else { hi };
    let mut pts = vec![0.0];
    for b in f.breaks() {
        if b > 0.0 && b < hi {
            pts.push(b);
        }
    }
    let mut x = 1.0;
    while x < hi {
        if x > *pts.last().unwrap() {
            pts.push(x);
        }
        x *= 2.0;
    }
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let st = QuadratureSettings::with_tol(1e-13, 1e-12);
    integrate_breaks(|t| f.eval(t) * (-s * t).exp(), &pts, &st).value
}

fn atom_label(a: &Atom) -> String {
    match a {
        Atom::Indicator { a, b } => format!("indicator:{a},{b}"),
        Atom::Exp { rate } => format!("exp:{rate}"),
        Atom::Gauss { center, width } => format!("gauss:{center},{width}"),
        Atom::PolyDecay { p } => format!("polydecay:{p}"),
        Atom::Cap { radius } => format!("cap:{radius}"),
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// `indicator:a,b`, `exp:rate`, `gauss:center,width`, `polydecay:p`, `cap:radius`, `zero`.
    fn from_str(s: &str) -> Result<TestFunction> {
        let s = s.trim();
        if s == "zero" {
            return Ok(TestFunction::zero());
        }
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("function spec '{s}' lacks ':'")))?;
        let vals: Vec<f64> = args
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{t}' in '{s}'"))))
            .collect::<Result<_>>()?;
        let want = |n: usize| {
            if vals.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("'{name}' takes {n} argument(s), got {}", vals.len())))
            }
        };
        let f = match name {
            "indicator" => {
                want(2)?;
                TestFunction::indicator(vals[0], vals[1])
            }
            "exp" => {
                want(1)?;
                TestFunction::exp(vals[0])
            }
            "gauss" => {
                want(2)?;
                TestFunction::gauss(vals[0], vals[1])
            }
            "polydecay" => {
                want(1)?;
                TestFunction::polydecay(vals[0])
            }
            "cap" => {
                want(1)?;
                TestFunction::cap(vals[0])
            }
            _ => return Err(Error::Parse(format!("unknown function '{name}'"))),
        }?;
        Ok(f.with_label(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let f: TestFunction = "indicator:0,1".parse().unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.5), 0.0);
        assert_eq!(f.label(), "indicator:0,1");
        let g: TestFunction = "exp:2".parse().unwrap();
        assert!((g.eval(1.0) - (-2f64).exp()).abs() < 1e-16);
        assert_eq!(g.eval(-1.0), 0.0);
        assert!("polydecay:0.5".parse::<TestFunction>().is_err());
        assert!("indicator:1,0".parse::<TestFunction>().is_err());
        assert!("wave:1".parse::<TestFunction>().is_err());
        assert!("exp:1,2".parse::<TestFunction>().is_err());
    }

    #[test]
    fn integrals_match_quadrature() {
        let st = QuadratureSettings::with_tol(1e-14, 1e-13);
        for spec in ["exp:1.3", "gauss:1,0.5", "polydecay:2.5", "gauss:-3,0.2"] {
            let f: TestFunction = spec.parse().unwrap();
            for (a, b) in [(0.0, 1.0), (0.3, 4.0), (-1.0, 0.5)] {
                let q = integrate_breaks(|x| f.eval(x), &[a, 0f64.clamp(a, b), b], &st).value;
                assert!((f.integral(a, b) - q).abs() < 1e-12, "{spec} on [{a},{b}]");
            }
        }
    }

    #[test]
    fn support_bounds_tail() {
        let f: TestFunction = "polydecay:3".parse().unwrap();
        let (_, hi) = f.support(1e-10).unwrap();
        let tail = 0.5 * (1.0 + hi).powf(-2.0);
        assert!(tail <= 1.0001e-10);
        let g: TestFunction = "exp:1".parse().unwrap();
        let (_, hi) = g.support(1e-12).unwrap();
        assert!((-hi).exp() <= 1.0001e-12);
    }

    #[test]
    fn certificates() {
        let f: TestFunction = "polydecay:3".parse().unwrap();
        assert!((f.certificate().delta - 1.9).abs() < 1e-15);
        f.verify_certificate().unwrap();
        for spec in ["indicator:0,1", "exp:1", "gauss:1,0.5"] {
            let g: TestFunction = spec.parse().unwrap();
            assert!(g.certificate().delta.is_infinite());
            g.verify_certificate().unwrap();
        }
        let c = TestFunction::cap(1.0).unwrap();
        c.verify_certificate().unwrap();
        assert!(c.check_space(&Space::HalfLine).is_err());
        assert!(f.check_space(&"sphere2".parse().unwrap()).is_err());
    }

    #[test]
    fn laplace_closed_forms_match_numeric() {
        let f = TestFunction::indicator(0.5, 2.0).unwrap();
        let g = TestFunction::exp(1.5).unwrap();
        for s in [0.1, 1.0, 7.0] {
            assert!((f.laplace(s) - numeric_laplace(&f, s)).abs() < 1e-12);
            assert!((g.laplace(s) - numeric_laplace(&g, s)).abs() < 1e-12);
        }
    }

    #[test]
    fn combinations() {
        let f = TestFunction::indicator(0.0, 1.0).unwrap();
        let g = TestFunction::exp(1.0).unwrap();
        let h = f.scaled(2.0).plus(&g.scaled(-1.0)).unwrap();
        assert!((h.eval(0.5) - (2.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!(h.pieces().is_none());
        let p = f.plus(&TestFunction::indicator(0.5, 2.0).unwrap()).unwrap().pieces().unwrap();
        assert_eq!(p, vec![(0.0, 0.5, 1.0), (0.5, 1.0, 2.0), (1.0, 2.0, 1.0)]);
        assert!(f.plus(&TestFunction::cap(1.0).unwrap()).is_err());
        let r = TestFunction::indicator(-1.0, 0.0).unwrap().reflected();
        assert_eq!(r.eval(0.5), 1.0);
    }
}

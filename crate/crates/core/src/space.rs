//! Metric spaces carrying a measure-definite representation `d(x, y) = μ(A_x Δ A_y)`.
//!
//! Each space knows the mass `μ(A_x)` of the set attached to a point and the
//! base measure `λ` used to integrate test functions against the field.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// How the sets `A_x` are chosen on a sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SphereMode {
    /// `A_x` is the set of hemispheres separating the pole `o` from `x`, so `μ(A_x) = d(o, x)`.
    Pinned,
    /// `A_x` is the set of hemispheres containing `x`, so `μ(A_x) = π/2` for every `x`.
    RotationInvariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// `[0, ∞)` with `A_x = [0, x]`.
    HalfLine,
    /// The real line with `A_x = [0, x]` for `x ≥ 0` and `[x, 0)` for `x < 0`.
    FullLine,
    /// `ℝⁿ` with `A_x` the hyperplanes separating the origin from `x`.
    Euclidean { dim: usize },
    /// The unit sphere `Sⁿ ⊂ ℝⁿ⁺¹` with geodesic distance. The pole is the last basis vector.
    Sphere { dim: usize, mode: SphereMode },
}

/// A point of one of the supported spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpacePoint {
    HalfLine(f64),
    FullLine(f64),
    Euclidean(Vec<f64>),
    /// Unit vector in the ambient space.
    Sphere(Vec<f64>),
}

const SPHERE_NORM_TOL: f64 = 1e-12;

impl Space {
    pub fn sphere(dim: usize, mode: SphereMode) -> Result<Space> {
        if dim == 0 {
            return domain("sphere dimension must be at least 1");
        }
        Ok(Space::Sphere { dim, mode })
    }

    pub fn euclidean(dim: usize) -> Result<Space> {
        if dim == 0 {
            return domain("euclidean dimension must be at least 1");
        }
        Ok(Space::Euclidean { dim })
    }

    /// Whether this is one of the two line spaces.
    pub fn is_line(&self) -> bool {
        matches!(self, Space::HalfLine | Space::FullLine)
    }

    /// Number of coordinates a point carries.
    pub fn coords(&self) -> usize {
        match *self {
            Space::HalfLine | Space::FullLine => 1,
            Space::Euclidean { dim } => dim,
            Space::Sphere { dim, .. } => dim + 1,
        }
    }

    pub fn point(&self, coords: &[f64]) -> Result<SpacePoint> {
        if coords.len() != self.coords() {
            return domain(format!(
                "{} expects {} coordinate(s), got {}",
                self,
                self.coords(),
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("coordinates must be finite");
        }
        match *self {
            Space::HalfLine => {
                if coords[0] < 0.0 {
                    return domain(format!("half-line coordinate must be >= 0, got {}", coords[0]));
                }
                Ok(SpacePoint::HalfLine(coords[0]))
            }
            Space::FullLine => Ok(SpacePoint::FullLine(coords[0])),
            Space::Euclidean { .. } => Ok(SpacePoint::Euclidean(coords.to_vec())),
            Space::Sphere { .. } => {
                let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > SPHERE_NORM_TOL {
                    return domain(format!("sphere point must have unit norm, got {norm}"));
                }
                Ok(SpacePoint::Sphere(coords.to_vec()))
            }
        }
    }

    /// Sphere point from hyperspherical angles. The first angle is the polar angle
    /// measured from the pole, the remaining ones parametrize the equatorial sphere.
    pub fn sphere_point_from_angles(&self, angles: &[f64]) -> Result<SpacePoint> {
        let Space::Sphere { dim, .. } = *self else {
            return domain("angles only parametrize sphere points");
        };
        if angles.len() != dim {
            return domain(format!("S^{dim} needs {dim} angle(s), got {}", angles.len()));
        }
        Ok(SpacePoint::Sphere(angles_to_unit(angles)))
    }

    pub fn pole(&self) -> Result<SpacePoint> {
        match *self {
            Space::Sphere { dim, .. } => {
                let mut v = vec![0.0; dim + 1];
                v[dim] = 1.0;
                Ok(SpacePoint::Sphere(v))
            }
            Space::HalfLine => Ok(SpacePoint::HalfLine(0.0)),
            Space::FullLine => Ok(SpacePoint::FullLine(0.0)),
            Space::Euclidean { dim } => Ok(SpacePoint::Euclidean(vec![0.0; dim])),
        }
    }

    /// Total mass of the base measure `λ`, or `None` when it is infinite.
    pub fn total_mass(&self) -> Option<f64> {
        match self {
            Space::Sphere { .. } => Some(PI),
            _ => None,
        }
    }

    /// Density of `λ` with respect to the surface measure (sphere) or Lebesgue measure.
    pub fn lambda_density(&self) -> f64 {
        match *self {
            Space::Sphere { dim, .. } => PI / sphere_area(dim),
            _ => 1.0,
        }
    }

    fn check(&self, x: &SpacePoint) -> Result<()> {
        let ok = match (self, x) {
            (Space::HalfLine, SpacePoint::HalfLine(t)) => *t >= 0.0,
            (Space::FullLine, SpacePoint::FullLine(_)) => true,
            (Space::Euclidean { dim }, SpacePoint::Euclidean(v)) => v.len() == *dim,
            (Space::Sphere { dim, .. }, SpacePoint::Sphere(u)) => u.len() == dim + 1,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(self.to_string(), x.to_string()))
        }
    }
}

/// Surface area `w_n` of the unit sphere `Sⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    let k = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(k) / libm::tgamma(k)
}

fn angles_to_unit(angles: &[f64]) -> Vec<f64> {
    // S^1 base case: the angle is the arc length from the pole (0, 1).
    if angles.len() == 1 {
        return vec![angles[0].sin(), angles[0].cos()];
    }
    let (s, c) = angles[0].sin_cos();
    let mut v: Vec<f64> = angles_to_unit(&angles[1..]).into_iter().map(|x| x * s).collect();
    v.push(c);
    v
}

/// Distance between two points of `space`.
pub fn distance(space: &Space, x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    space.check(x)?;
    space.check(y)?;
    Ok(match (x, y) {
        (SpacePoint::HalfLine(a), SpacePoint::HalfLine(b))
        | (SpacePoint::FullLine(a), SpacePoint::FullLine(b)) => (a - b).abs(),
        (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => a
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt(),
        (SpacePoint::Sphere(a), SpacePoint::Sphere(b)) => geodesic(a, b),
        _ => unreachable!("checked above"),
    })
}

pub(crate) fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    dot.clamp(-1.0, 1.0).acos()
}

/// Mass `μ(A_x)` of the set attached to `x`.
pub fn mu_a(space: &Space, x: &SpacePoint) -> Result<f64> {
    space.check(x)?;
    Ok(match (space, x) {
        (_, SpacePoint::HalfLine(t)) | (_, SpacePoint::FullLine(t)) => t.abs(),
        (_, SpacePoint::Euclidean(v)) => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
        (Space::Sphere { mode: SphereMode::RotationInvariant, .. }, SpacePoint::Sphere(_)) => {
            PI / 2.0
        }
        (Space::Sphere { dim, .. }, SpacePoint::Sphere(u)) => u[*dim].clamp(-1.0, 1.0).acos(),
        _ => unreachable!("checked above"),
    })
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::HalfLine => write!(f, "half-line"),
            Space::FullLine => write!(f, "full-line"),
            Space::Euclidean { dim } => write!(f, "rn{dim}"),
            Space::Sphere { dim, mode } => write!(
                f,
                "sphere{dim}@{}",
                match mode {
                    SphereMode::Pinned => "pinned",
                    SphereMode::RotationInvariant => "rotinv",
                }
            ),
        }
    }
}

impl fmt::Display for SpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        match self {
            SpacePoint::HalfLine(t) => write!(f, "half-line:{t}"),
            SpacePoint::FullLine(t) => write!(f, "full-line:{t}"),
            SpacePoint::Euclidean(v) => write!(f, "rn:{}", join(v)),
            SpacePoint::Sphere(v) => write!(f, "sphere{}:{}", v.len() - 1, join(v)),
        }
    }
}

fn parse_mode(s: &str) -> Result<SphereMode> {
    match s {
        "pinned" => Ok(SphereMode::Pinned),
        "rotinv" | "rotation-invariant" => Ok(SphereMode::RotationInvariant),
        other => Err(Error::Parse(format!("unknown sphere mode '{other}' (pinned|rotinv)"))),
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{t}' is not a number")))
        })
        .collect()
}

fn parse_dim(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .ok()
        .filter(|d| *d > 0)
        .ok_or_else(|| Error::Parse(format!("bad {what} dimension '{s}'")))
}

impl FromStr for Space {
    type Err = Error;

    /// Accepts `half-line`, `full-line`, `rnN` (or `rn:N`), `sphereN[@pinned|@rotinv]`.
    /// Spheres default to the rotation-invariant mode.
    fn from_str(s: &str) -> Result<Space> {
        let s = s.trim();
        let (body, mode) = match s.split_once('@') {
            Some((b, m)) => (b, Some(parse_mode(m)?)),
            None => (s, None),
        };
        let space = match body {
            "half-line" => Space::HalfLine,
            "full-line" => Space::FullLine,
            _ if body.starts_with("rn") => {
                Space::euclidean(parse_dim(body[2..].trim_start_matches(':'), "euclidean")?)?
            }
            _ if body.starts_with("sphere") => Space::sphere(
                parse_dim(&body[6..], "sphere")?,
                mode.unwrap_or(SphereMode::RotationInvariant),
            )?,
            _ => return Err(Error::Parse(format!("unknown space '{s}'"))),
        };
        if mode.is_some() && !matches!(space, Space::Sphere { .. }) {
            return Err(Error::Parse(format!("mode suffix only applies to spheres: '{s}'")));
        }
        Ok(space)
    }
}

/// Parse a full point literal such as `half-line:1.5`, `full-line:-2`, `rn:1,2,2`,
/// `sphere2:theta,phi@pinned`. Sphere literals with `n` values are angles, with
/// `n + 1` values a unit vector.
pub fn parse_point_literal(s: &str) -> Result<(Space, SpacePoint)> {
    let (head, tail) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("point literal '{s}' lacks a 'space:' prefix")))?;
    let (coords, mode) = match tail.split_once('@') {
        Some((c, m)) => (c, Some(m)),
        None => (tail, None),
    };
    let space: Space = match (head, mode) {
        ("rn", _) => {
            let n = parse_floats(coords)?.len();
            Space::euclidean(n)?
        }
        (h, Some(m)) => format!("{h}@{m}").parse()?,
        (h, None) => h.parse()?,
    };
    let point = parse_point(&space, coords)?;
    Ok((space, point))
}

/// Parse bare coordinates relative to a known space, or a full literal that must match it.
pub fn parse_point(space: &Space, s: &str) -> Result<SpacePoint> {
    let s = s.trim();
    if s.contains(':') {
        let (sp, p) = parse_point_literal(s)?;
        if sp != *space {
            return Err(Error::SpaceMismatch(space.to_string(), sp.to_string()));
        }
        return Ok(p);
    }
    let vals = parse_floats(s)?;
    match *space {
        Space::Sphere { dim, .. } if vals.len() == dim => space.sphere_point_from_angles(&vals),
        _ => space.point(&vals),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let h = Space::HalfLine;
        let d = distance(&h, &SpacePoint::HalfLine(1.0), &SpacePoint::HalfLine(3.0)).unwrap();
        assert_eq!(d, 2.0);

        let s1 = Space::sphere(1, SphereMode::Pinned).unwrap();
        let a = s1.point(&[1.0, 0.0]).unwrap();
        let b = s1.point(&[-1.0, 0.0]).unwrap();
        assert_eq!(distance(&s1, &a, &b).unwrap(), PI);

        let r2 = Space::euclidean(2).unwrap();
        let o = r2.point(&[0.0, 0.0]).unwrap();
        let p = r2.point(&[3.0, 4.0]).unwrap();
        assert_eq!(distance(&r2, &o, &p).unwrap(), 5.0);

        assert_eq!(mu_a(&Space::FullLine, &SpacePoint::FullLine(-2.0)).unwrap(), 2.0);
        let r3 = Space::euclidean(3).unwrap();
        assert_eq!(mu_a(&r3, &r3.point(&[1.0, 2.0, 2.0]).unwrap()).unwrap(), 3.0);
        let s2 = Space::sphere(2, SphereMode::RotationInvariant).unwrap();
        let x = s2.sphere_point_from_angles(&[0.3, 1.1]).unwrap();
        assert_eq!(mu_a(&s2, &x).unwrap(), PI / 2.0);
    }

    #[test]
    fn pinned_mass_is_polar_angle() {
        let s2 = Space::sphere(2, SphereMode::Pinned).unwrap();
        let x = s2.sphere_point_from_angles(&[0.7, 2.0]).unwrap();
        assert!((mu_a(&s2, &x).unwrap() - 0.7).abs() < 1e-14);
        assert_eq!(mu_a(&s2, &s2.pole().unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(Space::HalfLine.point(&[-1.0]).is_err());
        let s2 = Space::sphere(2, SphereMode::Pinned).unwrap();
        assert!(s2.point(&[1.0, 1.0, 0.0]).is_err());
        let err = distance(&Space::HalfLine, &SpacePoint::HalfLine(1.0), &SpacePoint::FullLine(1.0));
        assert!(matches!(err, Err(Error::SpaceMismatch(..))));
    }

    #[test]
    fn parses_literals() {
        let (sp, p) = parse_point_literal("half-line:1.5").unwrap();
        assert_eq!((sp, p), (Space::HalfLine, SpacePoint::HalfLine(1.5)));
        let (sp, p) = parse_point_literal("full-line:-2").unwrap();
        assert_eq!((sp, p), (Space::FullLine, SpacePoint::FullLine(-2.0)));
        let (sp, p) = parse_point_literal("rn:1,2,2").unwrap();
        assert_eq!(sp, Space::Euclidean { dim: 3 });
        assert_eq!(p, SpacePoint::Euclidean(vec![1.0, 2.0, 2.0]));
        let (sp, p) = parse_point_literal("sphere2:0,0@pinned").unwrap();
        assert_eq!(sp, Space::Sphere { dim: 2, mode: SphereMode::Pinned });
        assert_eq!(p, SpacePoint::Sphere(vec![0.0, 0.0, 1.0]));
        assert!(parse_point_literal("torus:1").is_err());
        assert_eq!("sphere2".parse::<Space>().unwrap().to_string(), "sphere2@rotinv");
        assert_eq!(parse_point(&Space::HalfLine, "3").unwrap(), SpacePoint::HalfLine(3.0));
    }

    #[test]
    fn area_of_low_spheres() {
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
    }
}

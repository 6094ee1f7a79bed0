//! Zonal functionals on `S²` discretized on a spherical Fibonacci node set.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::pow;
use crate::rng::RngStream;
use crate::space::{Space, SphereMode};
use crate::testfn::TestFunction;

pub const DEFAULT_SPHERE_NODES: usize = 4096;

/// Nodes of equal `λ`-mass `π/M` carrying nonzero weight for at least one function.
#[derive(Debug, Clone)]
pub(crate) struct SphereFunctional {
    mode: SphereMode,
    /// Node coordinates by axis.
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
    /// `μ(A_x)` per node.
    masses: Vec<f64>,
    /// `weights[f][k] = f(x_k)·π/M`.
    weights: Vec<Vec<f64>>,
}

/// Spherical Fibonacci lattice with `m` points.
pub fn fibonacci_nodes(m: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / m as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

impl SphereFunctional {
    pub(crate) fn new(space: &Space, fs: &[TestFunction], m: usize) -> Result<SphereFunctional> {
        let Space::Sphere { dim: 2, mode } = *space else {
            return Err(Error::Unsupported(format!("sphere sampling on {space}; only S^2 is implemented")));
        };
        if m == 0 {
            return Err(Error::Domain("node count must be positive".into()));
        }
        let cell = PI / m as f64;
        let mut nodes = Vec::new();
        let mut weights: Vec<Vec<f64>> = vec![Vec::new(); fs.len()];
        for x in fibonacci_nodes(m) {
            let theta = x[2].clamp(-1.0, 1.0).acos();
            let w: Vec<f64> = fs.iter().map(|f| f.eval(theta) * cell).collect();
            if w.iter().any(|v| *v != 0.0) {
                nodes.push(x);
                for (col, v) in weights.iter_mut().zip(w) {
                    col.push(v);
                }
            }
        }
        let masses = nodes
            .iter()
            .map(|x| match mode {
                SphereMode::RotationInvariant => PI / 2.0,
                SphereMode::Pinned => x[2].clamp(-1.0, 1.0).acos(),
            })
            .collect();
        Ok(SphereFunctional {
            mode,
            xs: nodes.iter().map(|x| x[0]).collect(),
            ys: nodes.iter().map(|x| x[1]).collect(),
            zs: nodes.iter().map(|x| x[2]).collect(),
            masses,
            weights,
        })
    }

    pub(crate) fn centering_at(&self, beta: f64, r: f64) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| {
                w.iter()
                    .zip(&self.masses)
                    .map(|(wk, m)| wk * 0.5 * -(-pow(2.0 * m, beta) * r).exp_m1())
                    .sum()
            })
            .collect()
    }

    /// Add `Σ_k w_k 1{m(A_{x_k}) odd}` for a Poisson configuration of intensity `rate·μ`.
    pub(crate) fn draw(&self, rate: f64, rng: &mut RngStream, parity: &mut Vec<u8>, out: &mut [f64]) {
        parity.clear();
        parity.resize(self.xs.len(), 0);
        let count = rng.poisson(rate * PI);
        for _ in 0..count {
            let p = rng.sphere_point(2);
            let flip = (matches!(self.mode, SphereMode::Pinned) && p[2] > 0.0) as u8;
            for (((par, x), y), z) in parity.iter_mut().zip(&self.xs).zip(&self.ys).zip(&self.zs) {
                *par ^= ((p[0] * x + p[1] * y + p[2] * z > 0.0) as u8) ^ flip;
            }
        }
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o += w.iter().zip(parity.iter()).map(|(v, p)| if *p != 0 { *v } else { 0.0 }).sum::<f64>();
        }
    }
}

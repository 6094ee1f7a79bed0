//! Monte Carlo realizations of the stochastic-integral representations.
//!
//! The frequency axis `r` is cut into geometric bins. Each bin contributes `J`
//! independent cells; a cell draws one Poisson configuration `ω′`, evaluates the
//! centered parity functional `h_f(r, ω′)` and multiplies it by an independent
//! symmetric stable variate scaled to the cell's share of the control measure.

mod grid;
mod line;
mod sphere;

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::kernels::{check_h, pow};
use crate::quadrature::{integrate_breaks, truncated_cov, QuadratureSettings};
use crate::rng::RngStream;
use crate::samples::SampleMatrix;
use crate::space::Space;
use crate::stats::{variance_se, EstimateReport};
use crate::testfn::TestFunction;

pub use grid::{Bin, DiscretizationGrid};
pub(crate) use line::LineFunctional;
pub use sphere::{fibonacci_nodes, DEFAULT_SPHERE_NODES};
pub(crate) use sphere::SphereFunctional;

/// The centered parity functional for a list of test functions on one space.
#[derive(Debug, Clone)]
pub(crate) enum Functional {
    Half(LineFunctional),
    Full(LineFunctional, LineFunctional),
    Sphere(SphereFunctional),
}

impl Functional {
    pub(crate) fn new(space: &Space, fs: &[TestFunction], sphere_nodes: usize) -> Result<Functional> {
        for f in fs {
            f.check_space(space)?;
            if !(f.certificate().delta > 0.0) {
                return Err(Error::Uncertified(format!("'{}' lacks a decay certificate", f.label())));
            }
        }
        match space {
            Space::HalfLine => Ok(Functional::Half(LineFunctional::new(fs))),
            Space::FullLine => {
                let neg: Vec<TestFunction> = fs.iter().map(|f| f.reflected()).collect();
                Ok(Functional::Full(LineFunctional::new(fs), LineFunctional::new(&neg)))
            }
            Space::Sphere { .. } => Ok(Functional::Sphere(SphereFunctional::new(space, fs, sphere_nodes)?)),
            Space::Euclidean { .. } => Err(Error::Unsupported(
                "path sampling on R^n (random hyperplane processes) is not implemented".into(),
            )),
        }
    }

    /// `∫ f p̃_{β,r} dλ` for every function.
    pub(crate) fn centering(&self, beta: f64, r: f64) -> Vec<f64> {
        match self {
            Functional::Half(l) => l.centering(beta, r),
            Functional::Full(p, n) => {
                p.centering(beta, r).iter().zip(n.centering(beta, r)).map(|(a, b)| a + b).collect()
            }
            Functional::Sphere(s) => s.centering_at(beta, r),
        }
    }

    /// Add the uncentered functional `∫ f 1{m(A_x) odd} λ(dx)` for intensity `rate·μ`.
    pub(crate) fn draw(&self, rate: f64, rng: &mut RngStream, scratch: &mut Vec<u8>, out: &mut [f64]) {
        match self {
            Functional::Half(l) => l.draw(rate, rng, out),
            Functional::Full(p, n) => {
                p.draw(rate, rng, out);
                n.draw(rate, rng, out);
            }
            Functional::Sphere(s) => s.draw(rate, rng, scratch, out),
        }
    }
}

/// Options shared by the functional samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellOptions {
    pub sphere_nodes: usize,
}

impl Default for CellOptions {
    fn default() -> Self {
        CellOptions { sphere_nodes: DEFAULT_SPHERE_NODES }
    }
}

#[allow(clippy::too_many_arguments)]
fn cell_scheme(
    seed: u64,
    space: &Space,
    alpha: f64,
    beta: f64,
    fs: &[TestFunction],
    grid: &DiscretizationGrid,
    reps: usize,
    opts: &CellOptions,
    kind: &str,
) -> Result<SampleMatrix> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("stability index must lie in (0, 2], got {alpha}"));
    }
    crate::kernels::check_beta(beta)?;
    grid.validate()?;
    if fs.is_empty() {
        return domain("at least one test function is required");
    }
    let func = Functional::new(space, fs, opts.sphere_nodes)?;
    let bins: Vec<(f64, f64, Vec<f64>)> = grid
        .bin_list()
        .iter()
        .map(|b| {
            let mass = 2.0 * b.log_width();
            (b.node, pow(mass / grid.paths as f64, 1.0 / alpha), func.centering(beta, b.node))
        })
        .collect();
    let nf = fs.len();
    let plan = json!({
        "kind": kind,
        "space": space.to_string(),
        "alpha": alpha,
        "beta": beta,
        "functions": fs.iter().map(|f| f.label().to_string()).collect::<Vec<_>>(),
        "grid": grid,
        "replicates": reps,
        "seed": seed,
        "sphere_nodes": matches!(space, Space::Sphere { .. }).then_some(opts.sphere_nodes),
    });
    let labels = fs.iter().map(|f| f.label().to_string()).collect();
    SampleMatrix::from_rows(labels, reps, plan, |rep| {
        let mut rng = RngStream::new(seed, rep, 0);
        let mut out = vec![0.0; nf];
        let mut raw = vec![0.0; nf];
        let mut scratch = Vec::new();
        for (r, scale, center) in &bins {
            for _ in 0..grid.paths {
                raw.iter_mut().for_each(|v| *v = 0.0);
                let rate = rng.subordinator_unchecked(beta, *r);
                func.draw(rate, &mut rng, &mut scratch, &mut raw);
                let x = rng.sas_unchecked(alpha) * scale;
                for ((o, v), c) in out.iter_mut().zip(&raw).zip(center) {
                    *o += x * (v - c);
                }
            }
        }
        out
    })
}

/// Samples of `(G(f_1), …, G(f_k))` for the log-correlated field with Hurst index `h`.
pub fn mc_gaussian_functional(
    seed: u64,
    space: &Space,
    h: f64,
    fs: &[TestFunction],
    grid: &DiscretizationGrid,
    reps: usize,
    opts: &CellOptions,
) -> Result<SampleMatrix> {
    check_h(h)?;
    cell_scheme(seed, space, 2.0, 2.0 * h, fs, grid, reps, opts, "gaussian-functional")
}

/// Samples of the α-stable functionals `(G_α(f_1), …)`; `β < 1` runs each path at a random
/// rate `S_{β,r}`.
#[allow(clippy::too_many_arguments)]
pub fn mc_stable_functional(
    seed: u64,
    space: &Space,
    alpha: f64,
    beta: f64,
    fs: &[TestFunction],
    grid: &DiscretizationGrid,
    reps: usize,
    opts: &CellOptions,
) -> Result<SampleMatrix> {
    cell_scheme(seed, space, alpha, beta, fs, grid, reps, opts, "stable-functional")
}

/// Result of re-running a Gaussian functional with twice as many bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub variance: f64,
    pub se: f64,
    pub refined_variance: f64,
    pub refined_se: f64,
    /// `|Δ| / sqrt(se² + refined_se²)`.
    pub shift_in_se: f64,
    /// Set when the shift exceeds 3 SE.
    pub under_resolved: bool,
}

/// Compare the variance of `G(f)` at `grid` and at `2B` bins (independent seeds).
pub fn refinement_check(
    seed: u64,
    space: &Space,
    h: f64,
    f: &TestFunction,
    grid: &DiscretizationGrid,
    reps: usize,
    opts: &CellOptions,
) -> Result<RefinementCheck> {
    let a = mc_gaussian_functional(seed, space, h, std::slice::from_ref(f), grid, reps, opts)?;
    let b = mc_gaussian_functional(seed ^ 0x2B, space, h, std::slice::from_ref(f), &grid.refined_bins(), reps, opts)?;
    let (va, sa) = variance_se(&a.column(0))?;
    let (vb, sb) = variance_se(&b.column(0))?;
    let shift = (va - vb).abs() / (sa * sa + sb * sb).sqrt();
    Ok(RefinementCheck {
        variance: va,
        se: sa,
        refined_variance: vb,
        refined_se: sb,
        shift_in_se: shift,
        under_resolved: shift > 3.0,
    })
}

/// How to sample the truncated field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FieldMethod {
    /// Symmetric factorization of the exact covariance matrix.
    Exact,
    /// The stochastic-integral representation on a grid with `r_max = 1/ε`.
    Representation(DiscretizationGrid),
}

/// Gaussian vectors `(G^{(ε)}(t_1), …, G^{(ε)}(t_m))`.
pub fn sample_truncated_field(
    seed: u64,
    times: &[f64],
    eps: f64,
    reps: usize,
    method: FieldMethod,
) -> Result<SampleMatrix> {
    if times.is_empty() {
        return domain("at least one time is required");
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return domain("times must be finite and >= 0");
    }
    if !(eps > 0.0) {
        return domain(format!("ε must be > 0, got {eps}"));
    }
    let labels: Vec<String> = times.iter().map(|t| format!("t={t}")).collect();
    let m = times.len();
    match method {
        FieldMethod::Exact => {
            let c = DMatrix::from_fn(m, m, |i, j| truncated_cov(times[i], times[j], eps).expect("validated"));
            let factor = psd_factor(&c)?;
            let plan = json!({"kind": "truncated-field", "method": "exact", "times": times, "eps": eps, "replicates": reps, "seed": seed});
            SampleMatrix::from_rows(labels, reps, plan, |rep| {
                let mut rng = RngStream::new(seed, rep, 0);
                let z: Vec<f64> = (0..factor.ncols()).map(|_| rng.gaussian()).collect();
                (0..m).map(|i| (0..factor.ncols()).map(|k| factor[(i, k)] * z[k]).sum()).collect()
            })
        }
        FieldMethod::Representation(grid) => {
            grid.validate()?;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|a, b| times[*a].total_cmp(&times[*b]));
            let bins: Vec<(f64, f64)> = grid
                .bin_list()
                .iter()
                .map(|b| (b.node, (2.0 * b.log_width() / grid.paths as f64).sqrt() * SQRT_2))
                .collect();
            let plan = json!({"kind": "truncated-field", "method": "representation", "times": times, "eps": eps, "grid": grid, "replicates": reps, "seed": seed});
            SampleMatrix::from_rows(labels, reps, plan, |rep| {
                let mut rng = RngStream::new(seed, rep, 0);
                let mut out = vec![0.0; m];
                for &(r, scale) in &bins {
                    for _ in 0..grid.paths {
                        let x = scale * rng.gaussian();
                        let mut odd = false;
                        let mut prev = 0.0;
                        for &i in &order {
                            let dt = times[i] - prev;
                            if dt > 0.0 && rng.bernoulli(-0.5 * (-2.0 * r * dt).exp_m1()) {
                                odd = !odd;
                            }
                            prev = times[i];
                            let p = -0.5 * (-2.0 * r * times[i]).exp_m1();
                            out[i] += x * (odd as u8 as f64 - p);
                        }
                    }
                }
                out
            })
        }
    }
}

/// Factor `C = L Lᵀ` through a symmetric eigendecomposition with clipping of tiny
/// negative eigenvalues; coordinates with zero variance get zero rows.
pub(crate) fn psd_factor(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = c.nrows();
    let active: Vec<usize> = (0..m).filter(|&i| c[(i, i)] != 0.0).collect();
    let mut l = DMatrix::zeros(m, active.len());
    if active.is_empty() {
        return Ok(l);
    }
    let sub = DMatrix::from_fn(active.len(), active.len(), |i, j| c[(active[i], active[j])]);
    let eig = sub.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::NotPsd(min));
    }
    for (a, &i) in active.iter().enumerate() {
        for k in 0..active.len() {
            let lam = if eig.eigenvalues[k] < -1e-10 { 0.0 } else { eig.eigenvalues[k].max(0.0) };
            l[(i, k)] = eig.eigenvectors[(a, k)] * lam.sqrt();
        }
    }
    Ok(l)
}

/// Default grid for the subordinated representation.
pub fn subordinated_grid() -> DiscretizationGrid {
    DiscretizationGrid { r_min: 1e-8, r_max: 1e6, bins: 140, paths: 8 }
}

/// `C_K = K 2^{−K} / Γ(1 − K)`.
pub fn subordinated_constant(k: f64) -> f64 {
    k * pow(2.0, -k) / libm::tgamma(1.0 - k)
}

/// Samples of the subordinated bi-fBm at `times`, on `grid` (see [`subordinated_grid`]).
pub fn sample_subordinated_bifbm(
    seed: u64,
    h: f64,
    k: f64,
    times: &[f64],
    reps: usize,
    grid: &DiscretizationGrid,
) -> Result<SampleMatrix> {
    check_h(h)?;
    if !(k > 0.0 && k < 1.0) {
        return domain(format!("K must lie in (0, 1) for the subordinated representation, got {k}"));
    }
    grid.validate()?;
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return domain("times must be finite and >= 0");
    }
    let m = times.len();
    let beta = 2.0 * h;
    let ck = subordinated_constant(k);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| times[*a].total_cmp(&times[*b]));
    let bins: Vec<(f64, f64, f64)> = grid
        .bin_list()
        .iter()
        .map(|b| {
            let (a, z) = (pow(b.lo, -k), pow(b.hi, -k));
            (a, a - z, (ck * (a - z) / k / grid.paths as f64).sqrt())
        })
        .collect();
    let plan = json!({"kind": "subordinated-bifbm", "H": h, "K": k, "times": times, "grid": grid, "replicates": reps, "seed": seed});
    let labels = times.iter().map(|t| format!("t={t}")).collect();
    SampleMatrix::from_rows(labels, reps, plan, |rep| {
        let mut rng = RngStream::new(seed, rep, 0);
        let mut out = vec![0.0; m];
        for &(top, span, scale) in &bins {
            for _ in 0..grid.paths {
                // r from the density ∝ r^{−K−1} on the bin, by inversion.
                let r = pow(top - rng.uniform() * span, -1.0 / k);
                let s = rng.subordinator_unchecked(beta, r);
                let x = scale * rng.gaussian();
                let mut odd = false;
                let mut prev = 0.0;
                for &i in &order {
                    let dt = times[i] - prev;
                    if dt > 0.0 && rng.bernoulli(-0.5 * (-2.0 * s * dt).exp_m1()) {
                        odd = !odd;
                    }
                    prev = times[i];
                    let p = -0.5 * (-pow(2.0 * times[i], beta) * r).exp_m1();
                    out[i] += x * (odd as u8 as f64 - p);
                }
            }
        }
        out
    })
}

/// Covariance at `(s, t)` missed by restricting the control measure to the grid's `r`-range.
pub fn subordinated_truncation_budget(h: f64, k: f64, s: f64, t: f64, grid: &DiscretizationGrid) -> Result<f64> {
    let full = crate::kernels::subordinated_bifbm_cov(h, k, s, t)?;
    let beta = 2.0 * h;
    let a = pow(2.0 * (t - s).abs(), beta);
    let b = pow(2.0 * s, beta) + pow(2.0 * t, beta);
    let ck = subordinated_constant(k);
    let (l0, l1) = (grid.r_min.ln(), grid.r_max.ln());
    let mut pts = vec![l0];
    let mut u = l0.ceil();
    while u < l1 {
        pts.push(u);
        u += 1.0;
    }
    pts.push(l1);
    let st = QuadratureSettings::with_tol(1e-14, 1e-12);
    let inside = integrate_breaks(
        |u| {
            let r = u.exp();
            ck * pow(r, -k) * 0.25 * (-a * r).exp() * -(-(b - a) * r).exp_m1()
        },
        &pts,
        &st,
    )
    .into_result(st.abs_tol)?;
    Ok((full - inside).abs())
}

/// Stratified Monte Carlo of `∫_0^∞ E[(1{N(rs)=j} − p_s)(1{N(rt)=j} − p_t)] dr/r` over a
/// rate-`r` Poisson process `N`, with `r` log-uniform inside `strata` equal cells of
/// `ln r ∈ [ln r_min, ln r_max]` and `paths` draws per cell.
#[allow(clippy::too_many_arguments)]
pub fn mc_occupancy_cov(
    seed: u64,
    j: u32,
    s: f64,
    t: f64,
    r_min: f64,
    r_max: f64,
    strata: usize,
    paths: usize,
) -> Result<EstimateReport> {
    if j == 0 {
        return domain("occupancy covariance needs j >= 1");
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if !(s > 0.0 && t.is_finite()) {
        return domain(format!("need 0 < s <= t < ∞, got s={s}, t={t}"));
    }
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) || strata == 0 || paths < 2 {
        return domain("need 0 < r_min < r_max, strata >= 1 and paths >= 2");
    }
    let (l0, l1) = (r_min.ln(), r_max.ln());
    let width = (l1 - l0) / strata as f64;
    let cells: Vec<(f64, f64)> = (0..strata)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, k as u64, 0);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..paths {
                let r = (l0 + width * (k as f64 + rng.uniform())).exp();
                let ns = rng.poisson(r * s);
                let nt = ns + rng.poisson(r * (t - s));
                let a = (ns == j as u64) as u8 as f64 - crate::kernels::poisson_pmf(j, r * s);
                let b = (nt == j as u64) as u8 as f64 - crate::kernels::poisson_pmf(j, r * t);
                sum += a * b;
                sq += (a * b) * (a * b);
            }
            let n = paths as f64;
            let mean = sum / n;
            let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
            (width * mean, width * width * var / n)
        })
        .collect();
    let estimate = cells.iter().map(|c| c.0).sum();
    let se = cells.iter().map(|c| c.1).sum::<f64>().sqrt();
    let plan = json!({"kind": "occupancy-cov", "j": j, "s": s, "t": t, "r_min": r_min, "r_max": r_max,
        "strata": strata, "paths": paths, "seed": seed});
    Ok(EstimateReport::new(format!("occupancy j={j} s={s} t={t}"), estimate, se, (strata * paths) as u64, seed, plan))
}

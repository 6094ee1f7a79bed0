//! Aggregated layer models whose normalized sums converge to the log-correlated functionals.
//!
//! The half-line model stacks `m` independent layers. Layer `i` draws `q_i ~ U(0, 1)`
//! and a Bernoulli(`q_i`) sequence whose running sum `τ_{i,j}` is tracked only through
//! its parity; the layer functional is
//! `ψ_i(f) = 2 Σ_j f_{n,j} (1{τ_{i,j} odd} − p_j(q_i))` with `p_j(q) = ½(1 − (1 − 2q)^j)`.
//! The general model replaces the Bernoulli sequence by a Poisson configuration of
//! intensity `n q_i μ` and parities of the counts in `A_x`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::kernels::pow;
use crate::quadrature::{frullani_truncated, integrate_breaks, QuadratureSettings};
use crate::rng::RngStream;
use crate::sampler::{fibonacci_nodes, Functional, DEFAULT_SPHERE_NODES};
use crate::samples::SampleMatrix;
use crate::space::{Space, SphereMode};
use crate::stats::{empirical_chf, variance_se};
use crate::testfn::TestFunction;

/// Mass of `f` allowed beyond the last cell.
const TAIL_TOL: f64 = 1e-12;

/// How a half-line layer is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LayerMethod {
    /// Blocks when the weights have few distinct runs, jumps otherwise.
    #[default]
    Auto,
    /// Runs of equal weights: arrival count and odd-state occupation drawn per run.
    Blocks,
    /// Geometric jumps between arrivals with prefix sums of the weights.
    Jumps,
    /// One Bernoulli draw per step.
    Sequential,
}

impl std::str::FromStr for LayerMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(LayerMethod::Auto),
            "blocks" => Ok(LayerMethod::Blocks),
            "jumps" => Ok(LayerMethod::Jumps),
            "sequential" => Ok(LayerMethod::Sequential),
            _ => Err(Error::Parse(format!("unknown layer method '{s}' (auto|blocks|jumps|sequential)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedPlan {
    /// Time discretization.
    pub n: usize,
    /// Number of layers `m_n`.
    pub m: usize,
    pub alpha: f64,
    pub space: Space,
    pub fs: Vec<TestFunction>,
    pub thetas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub method: LayerMethod,
    pub sphere_nodes: usize,
}

impl AggregatedPlan {
    /// Half-line, α = 2, θ ∈ {0.25, 0.5, 1, 2}, 1000 replicates, seed 0.
    pub fn new(n: usize, m: usize, fs: Vec<TestFunction>) -> AggregatedPlan {
        AggregatedPlan {
            n,
            m,
            alpha: 2.0,
            space: Space::HalfLine,
            fs,
            thetas: vec![0.25, 0.5, 1.0, 2.0],
            reps: 1000,
            seed: 0,
            method: LayerMethod::Auto,
            sphere_nodes: DEFAULT_SPHERE_NODES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return domain("n and m_n must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return domain(format!("stability index must lie in (0, 2], got {}", self.alpha));
        }
        if self.fs.is_empty() {
            return domain("at least one test function is required");
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return domain("θ probes must be finite");
        }
        for f in &self.fs {
            f.check_space(&self.space)?;
        }
        Ok(())
    }

    /// Warning text when `m_n / n < 10`.
    pub fn regime_warning(&self) -> Option<String> {
        let ratio = self.m as f64 / self.n as f64;
        (ratio < 10.0).then(|| format!("m_n/n = {ratio} is below 10; the CLT regime needs m_n/n → ∞"))
    }

    fn plan_json(&self, kind: &str) -> serde_json::Value {
        json!({
            "kind": kind,
            "space": self.space.to_string(),
            "n": self.n,
            "m": self.m,
            "alpha": self.alpha,
            "functions": self.fs.iter().map(|f| f.label().to_string()).collect::<Vec<_>>(),
            "method": self.method,
            "replicates": self.reps,
            "seed": self.seed,
            "sphere_nodes": matches!(self.space, Space::Sphere { .. }).then_some(self.sphere_nodes),
        })
    }
}

/// Cell integrals `f_{n,j} = ∫_{(j−1)/n}^{j/n} f`, cut where less than `1e−12` of the mass remains.
pub fn f_cell_weights(f: &TestFunction, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    f.check_space(&Space::HalfLine)?;
    let Some((_, hi)) = f.support(TAIL_TOL) else {
        return Ok(Vec::new());
    };
    let nf = n as f64;
    let cells = (hi.max(0.0) * nf).ceil() as usize;
    let pieces = f.pieces();
    Ok((1..=cells)
        .map(|j| {
            let (a, b) = ((j - 1) as f64 / nf, j as f64 / nf);
            match &pieces {
                Some(ps) => ps
                    .iter()
                    .map(|&(lo, hi, v)| {
                        if lo <= a && b <= hi {
                            v / nf
                        } else {
                            v * (b.min(hi) - a.max(lo)).max(0.0)
                        }
                    })
                    .sum(),
                None => f.integral(a, b),
            }
        })
        .collect())
}

/// `1 − ρ^{2j}` for `ρ = 1 − 2r`.
fn one_minus_rho2j(log_abs_rho: f64, j: usize) -> f64 {
    -(2.0 * j as f64 * log_abs_rho).exp_m1()
}

/// `E ψ_{n,r}(f)²` from the cell weights, by a backward suffix recursion.
pub fn psi_second_moment_from_weights(w: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("r must lie in (0, 1), got {r}"));
    }
    let rho = 1.0 - 2.0 * r;
    let lr = rho.abs().ln();
    // suffix = Σ_{j' > j} w_{j'} ρ^{j'−j}
    let mut suffix = 0.0;
    let mut total = 0.0;
    for j in (1..=w.len()).rev() {
        let wj = w[j - 1];
        total += one_minus_rho2j(lr, j) * wj * (wj + 2.0 * suffix);
        suffix = rho * (wj + suffix);
    }
    Ok(total)
}

/// `E ψ_{n,r}(f)²` for the half-line layer with Bernoulli rate `r`.
pub fn exact_psi_second_moment(f: &TestFunction, n: usize, r: f64) -> Result<f64> {
    psi_second_moment_from_weights(&f_cell_weights(f, n)?, r)
}

/// `Var G_n(f) = ∫_0^1 E ψ_{n,r}(f)² r^{−1} dr` (α = 2, any `m_n`).
#[allow(non_snake_case)]
pub fn exact_variance_G_n(f: &TestFunction, n: usize) -> Result<f64> {
    let w = f_cell_weights(f, n)?;
    variance_from_weights(&w)
}

pub(crate) fn variance_from_weights(w: &[f64]) -> Result<f64> {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let scale = 4.0 * l1 * l1;
    // E ψ² ≤ 4 r J (Σ|w|)² near 0 and E ψ² ≤ 4 (Σ|w|)² everywhere.
    let u0 = (1e-14 / (scale * w.len() as f64)).ln();
    let v0 = (1e-14 / (2.0 * scale)).ln();
    let half = 0.5f64.ln();
    let st = QuadratureSettings::with_tol(1e-13 * scale, 1e-11);
    let moment = |r: f64| psi_second_moment_from_weights(w, r).unwrap_or(f64::NAN);
    let lower = integrate_breaks(|u| moment(u.exp()), &unit_breaks(u0, half), &st).into_result(st.abs_tol)?;
    let upper = integrate_breaks(
        |v| {
            let s = v.exp();
            moment(1.0 - s) * s / (1.0 - s)
        },
        &unit_breaks(v0, half),
        &st,
    )
    .into_result(st.abs_tol)?;
    Ok(lower + upper)
}

fn unit_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut u = lo.floor() + 1.0;
    while u < hi {
        pts.push(u);
        u += 1.0;
    }
    pts.push(hi);
    pts
}

/// `Σ_{j=j0}^{j0+l−1} p_j(q)`.
fn parity_mass(q: f64, j0: usize, l: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let lf = l as f64;
    let j1 = j0 + l - 1;
    let rho = 1.0 - 2.0 * q;
    if rho <= 0.0 {
        if rho == 0.0 {
            return 0.5 * lf;
        }
        let sign = |j: usize| if j % 2 == 1 { -1.0 } else { 1.0 };
        let a = rho.abs();
        let geo = sign(j0) * a.powf(j0 as f64) * (1.0 - sign(l) * a.powf(lf)) / (1.0 - rho);
        return 0.5 * (lf - geo);
    }
    let c = (-2.0 * q).ln_1p();
    if l <= 64 {
        return 0.5 * (j0..=j1).map(|j| -(c * j as f64).exp_m1()).sum::<f64>();
    }
    if -c * (j1 as f64) < 1e-2 {
        // Σ (1 − e^{jc}) = −Σ_k c^k S_k / k! with power sums S_k over [j0, j1].
        let (a, b) = ((j0 - 1) as f64, j1 as f64);
        let s = |k: usize| power_sum(k, b) - power_sum(k, a);
        let mut term = 1.0;
        let mut total = 0.0;
        for k in 1..=6 {
            term *= c / k as f64;
            total -= term * s(k);
        }
        return 0.5 * total;
    }
    // 1 − e^c = 2q exactly.
    let geo = (c * j0 as f64).exp() * -(c * lf).exp_m1() / (2.0 * q);
    0.5 * (lf - geo)
}

/// `Σ_{j=1}^{x} j^k` for `k ≤ 6`.
fn power_sum(k: usize, x: f64) -> f64 {
    let (x2, x3) = (x * x, x * x * x);
    match k {
        1 => x * (x + 1.0) / 2.0,
        2 => x * (x + 1.0) * (2.0 * x + 1.0) / 6.0,
        3 => x2 * (x + 1.0) * (x + 1.0) / 4.0,
        4 => x * (x + 1.0) * (2.0 * x + 1.0) * (3.0 * x2 + 3.0 * x - 1.0) / 30.0,
        5 => x2 * (x + 1.0) * (x + 1.0) * (2.0 * x2 + 2.0 * x - 1.0) / 12.0,
        6 => x * (x + 1.0) * (2.0 * x + 1.0) * (3.0 * x2 * x2 + 6.0 * x3 - 3.0 * x + 1.0) / 42.0,
        _ => unreachable!(),
    }
}

/// A run of steps `[start, start + len)` (1-based) with constant weights.
#[derive(Debug, Clone)]
struct Block {
    start: usize,
    len: usize,
    w: Vec<f64>,
    zero: bool,
}

/// Half-line layer simulator shared by all methods.
#[derive(Debug, Clone)]
struct HalfLineLayer {
    weights: Vec<Vec<f64>>,
    blocks: Vec<Block>,
    prefix: Vec<Vec<f64>>,
    method: LayerMethod,
}

impl HalfLineLayer {
    fn new(fs: &[TestFunction], n: usize, method: LayerMethod) -> Result<HalfLineLayer> {
        let mut weights = fs.iter().map(|f| f_cell_weights(f, n)).collect::<Result<Vec<_>>>()?;
        let len = weights.iter().map(Vec::len).max().unwrap_or(0);
        for w in &mut weights {
            w.resize(len, 0.0);
        }
        let mut blocks: Vec<Block> = Vec::new();
        for j in 0..len {
            let col: Vec<f64> = weights.iter().map(|w| w[j]).collect();
            match blocks.last_mut() {
                Some(b) if b.w == col => b.len += 1,
                _ => {
                    let zero = col.iter().all(|v| *v == 0.0);
                    blocks.push(Block { start: j + 1, len: 1, w: col, zero });
                }
            }
        }
        let method = match method {
            LayerMethod::Auto if blocks.len() * 8 <= len.max(1) => LayerMethod::Blocks,
            LayerMethod::Auto => LayerMethod::Jumps,
            m => m,
        };
        let prefix = weights
            .iter()
            .map(|w| {
                let mut p = Vec::with_capacity(w.len() + 1);
                p.push(0.0);
                let mut s = 0.0;
                for v in w {
                    s += v;
                    p.push(s);
                }
                p
            })
            .collect();
        Ok(HalfLineLayer { weights, blocks, prefix, method })
    }

    /// Draw `q ~ U(0, 1)` and `ψ(f)/2 = Σ_j f_{n,j}(1{τ_j odd} − p_j(q))` for every function
    /// into `out`; returns `q`.
    fn draw(&self, rng: &mut RngStream, out: &mut [f64]) -> f64 {
        out.iter_mut().for_each(|v| *v = 0.0);
        match self.method {
            LayerMethod::Blocks | LayerMethod::Auto => self.blocks_draw(rng, out),
            m => {
                let q = rng.uniform_open();
                if m == LayerMethod::Jumps {
                    self.jumps_draw(q, rng, out);
                } else {
                    self.sequential_draw(q, rng, out);
                }
                q
            }
        }
    }

    fn blocks_draw(&self, rng: &mut RngStream, out: &mut [f64]) -> f64 {
        let mut first_count = None;
        // With q uniform the arrival count of a first block of length L is uniform on
        // {0, …, L} and q | K ~ Beta(K + 1, L − K + 1).
        let q = match self.blocks.first() {
            Some(b) if b.start == 1 && !b.zero => {
                let k = ((b.len as f64 + 1.0) * rng.uniform()).floor().min(b.len as f64) as u64;
                first_count = Some(k);
                rng.beta((k + 1) as f64, (b.len as u64 - k + 1) as f64).max(f64::MIN_POSITIVE)
            }
            _ => rng.uniform_open(),
        };
        self.blocks_fill(q, first_count, rng, out);
        q
    }

    fn blocks_fill(&self, q: f64, first_count: Option<u64>, rng: &mut RngStream, out: &mut [f64]) {
        let mut odd = false;
        let rho = 1.0 - 2.0 * q;
        for (i, b) in self.blocks.iter().enumerate() {
            let l = b.len as u64;
            if b.zero {
                let flip = 0.5 * (1.0 - if rho >= 0.0 { rho.powf(l as f64) } else { rho.powi(b.len as i32) });
                if rng.bernoulli(flip) {
                    odd = !odd;
                }
                continue;
            }
            let k = match (i, first_count) {
                (0, Some(k)) => k,
                _ => rng.binomial(l, q),
            };
            // Arrivals split the non-arrival steps uniformly over k + 1 gaps; gap g keeps parity start + g.
            let from_even = if k == 0 { 0 } else { k.div_ceil(2) + rng.beta_binomial(l - k, k.div_ceil(2) as f64, (k / 2 + 1) as f64) };
            let occ = if odd { l - from_even } else { from_even } as f64;
            let centre = parity_mass(q, b.start, b.len);
            for (o, w) in out.iter_mut().zip(&b.w) {
                *o += w * (occ - centre);
            }
            if k % 2 == 1 {
                odd = !odd;
            }
        }
    }

    fn jumps_draw(&self, q: f64, rng: &mut RngStream, out: &mut [f64]) {
        let len = self.prefix[0].len() - 1;
        let log_miss = (-q).ln_1p();
        let mut odd = false;
        // The current state started at step `seg`; step `pos` is the next Bernoulli trial (0-based).
        let (mut seg, mut pos) = (0usize, 0usize);
        loop {
            let gap = if q >= 1.0 { 0.0 } else { (rng.uniform_open().ln() / log_miss).floor() };
            let arrival = if gap >= (len - pos) as f64 { len } else { pos + gap as usize };
            if odd {
                for (o, p) in out.iter_mut().zip(&self.prefix) {
                    *o += p[arrival] - p[seg];
                }
            }
            if arrival >= len {
                break;
            }
            odd = !odd;
            seg = arrival;
            pos = arrival + 1;
        }
        self.subtract_centering(q, out);
    }

    fn sequential_draw(&self, q: f64, rng: &mut RngStream, out: &mut [f64]) {
        let len = self.prefix[0].len() - 1;
        let mut odd = false;
        for j in 0..len {
            if rng.bernoulli(q) {
                odd = !odd;
            }
            if odd {
                for (o, w) in out.iter_mut().zip(&self.weights) {
                    *o += w[j];
                }
            }
        }
        self.subtract_centering(q, out);
    }

    fn subtract_centering(&self, q: f64, out: &mut [f64]) {
        let rho = 1.0 - 2.0 * q;
        for (o, w) in out.iter_mut().zip(&self.weights) {
            let mut power = 1.0;
            let mut geo = 0.0;
            for v in w {
                power *= rho;
                geo += v * power;
                if power.abs() < 1e-18 {
                    break;
                }
            }
            let total: f64 = w.iter().sum();
            *o -= 0.5 * (total - geo);
        }
    }
}

fn aggregate<F>(plan: &AggregatedPlan, kind: &str, layer: F) -> Result<SampleMatrix>
where
    F: Fn(&mut RngStream, &mut Vec<u8>, &mut [f64]) -> f64 + Sync,
{
    let nf = plan.fs.len();
    let alpha = plan.alpha;
    let norm = pow(plan.m as f64, -1.0 / alpha);
    let labels = plan.fs.iter().map(|f| f.label().to_string()).collect();
    SampleMatrix::from_rows(labels, plan.reps, plan.plan_json(kind), |rep| {
        let mut rng = RngStream::new(plan.seed, rep, 0);
        let mut total = vec![0.0; nf];
        let mut half_psi = vec![0.0; nf];
        let mut scratch = Vec::new();
        for _ in 0..plan.m {
            let q = layer(&mut rng, &mut scratch, &mut half_psi);
            // 2^{1/α} X^{(α)} (ψ/2) q^{−1/α}; for α = 2 this is N(0, 1)·ψ/√q.
            let x = if alpha == 2.0 {
                2.0 * rng.gaussian() / q.sqrt()
            } else {
                rng.sas_unchecked(alpha) * pow(2.0 / q, 1.0 / alpha)
            };
            for (t, h) in total.iter_mut().zip(&half_psi) {
                *t += x * h;
            }
        }
        total.iter().map(|t| t * norm).collect()
    })
}

/// Replicates of `G_n(f) = m_n^{−1/α} Σ_i 2^{1/α} X_i^{(α)} (ψ_i(f)/2) q_i^{−1/α}` for the half-line model.
#[allow(non_snake_case)]
pub fn simulate_G_n(plan: &AggregatedPlan) -> Result<SampleMatrix> {
    plan.validate()?;
    if plan.space != Space::HalfLine {
        return Err(Error::SpaceMismatch(plan.space.to_string(), "half-line".into()));
    }
    let layer = HalfLineLayer::new(&plan.fs, plan.n, plan.method)?;
    aggregate(plan, "aggregated-bernoulli", |rng, _, out| layer.draw(rng, out))
}

/// Replicates of the point-process model: per layer a Poisson configuration of intensity `n q μ`.
#[allow(non_snake_case)]
pub fn simulate_general_G_n(plan: &AggregatedPlan) -> Result<SampleMatrix> {
    plan.validate()?;
    if matches!(plan.space, Space::Euclidean { .. }) {
        return Err(Error::Unsupported("point-process layers on R^n are not implemented".into()));
    }
    let func = Functional::new(&plan.space, &plan.fs, plan.sphere_nodes)?;
    let n = plan.n as f64;
    aggregate(plan, "aggregated-poisson", |rng, scratch, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        let q = rng.uniform_open();
        let rate = n * q;
        func.draw(rate, rng, scratch, out);
        for (o, c) in out.iter_mut().zip(func.centering(1.0, rate)) {
            *o -= c;
        }
        q
    })
}

/// Exact variance of the point-process model on `S²` with the node discretization of
/// [`simulate_general_G_n`]: `Σ_{k,l} w_k w_l ∫_0^n 4Γ_r(x_k, x_l) dr/r`.
pub fn exact_variance_general_sphere(space: &Space, f: &TestFunction, n: usize, nodes: usize) -> Result<f64> {
    let Space::Sphere { dim: 2, mode } = *space else {
        return Err(Error::Unsupported(format!("exact sphere variance on {space}")));
    };
    f.check_space(space)?;
    let cell = std::f64::consts::PI / nodes as f64;
    let pts: Vec<([f64; 3], f64)> = fibonacci_nodes(nodes)
        .into_iter()
        .map(|x| (x, f.eval(x[2].clamp(-1.0, 1.0).acos()) * cell))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    let mass = |x: &[f64; 3]| match mode {
        SphereMode::RotationInvariant => std::f64::consts::FRAC_PI_2,
        SphereMode::Pinned => x[2].clamp(-1.0, 1.0).acos(),
    };
    let t = n as f64;
    let mut total = 0.0;
    for (i, (x, wx)) in pts.iter().enumerate() {
        for (k, (y, wy)) in pts.iter().enumerate().skip(i) {
            let d = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).clamp(-1.0, 1.0).acos();
            let b = 2.0 * (mass(x) + mass(y));
            let a = 2.0 * d;
            let v = if a == 0.0 { crate::quadrature::ein(b * t) } else { frullani_truncated(a, b, t)? };
            total += if i == k { wx * wy * v } else { 2.0 * wx * wy * v };
        }
    }
    Ok(total)
}

/// Characteristic-function probe of one simulated coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltPoint {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub target_re: Option<f64>,
    pub z_re: Option<f64>,
    pub z_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub name: String,
    pub function: String,
    pub points: Vec<CltPoint>,
    pub sample_variance: Option<f64>,
    pub sample_variance_se: Option<f64>,
    pub target_variance: Option<f64>,
    pub exact_variance: Option<f64>,
    pub regime_warning: Option<String>,
    pub replicates: usize,
    pub seed: u64,
    pub plan: serde_json::Value,
}

impl CltReport {
    /// Largest `|z|` over the probes.
    pub fn max_abs_z(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| [p.z_re.unwrap_or(0.0).abs(), p.z_im.abs()])
            .fold(0.0, f64::max)
    }
}

fn z(est: f64, target: f64, se: f64) -> f64 {
    if se > 0.0 {
        (est - target) / se
    } else if est == target {
        0.0
    } else {
        f64::INFINITY.copysign(est - target)
    }
}

/// Compare column `col` with `exp(−θ² v / 2)` when `target_variance = Some(v)` (α = 2);
/// imaginary parts are always compared with 0.
pub fn clt_report(
    plan: &AggregatedPlan,
    samples: &SampleMatrix,
    col: usize,
    target_variance: Option<f64>,
    exact_variance: Option<f64>,
) -> Result<CltReport> {
    let x = samples.column(col);
    let chf = empirical_chf(&x, &plan.thetas)?;
    let points = chf
        .iter()
        .map(|c| {
            let target_re = target_variance.map(|v| (-0.5 * c.theta * c.theta * v).exp());
            CltPoint {
                theta: c.theta,
                re: c.re,
                im: c.im,
                se_re: c.se_re,
                se_im: c.se_im,
                target_re,
                z_re: target_re.map(|t| z(c.re, t, c.se_re)),
                z_im: z(c.im, 0.0, c.se_im),
            }
        })
        .collect();
    let (sv, sse) = if plan.alpha == 2.0 && x.len() >= 4 {
        let (v, s) = variance_se(&x)?;
        (Some(v), Some(s))
    } else {
        (None, None)
    };
    Ok(CltReport {
        name: "clt".into(),
        function: samples.labels()[col].clone(),
        points,
        sample_variance: sv,
        sample_variance_se: sse,
        target_variance,
        exact_variance,
        regime_warning: plan.regime_warning(),
        replicates: samples.rows(),
        seed: plan.seed,
        plan: samples.plan.clone(),
    })
}

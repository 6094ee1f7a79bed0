//! Reproducible random streams and the distribution samplers used by the representations.
//!
//! A stream is keyed by `(master seed, replicate, substream)`; the key is expanded
//! with SplitMix64 into a ChaCha8 key, so every path yields an independent,
//! bit-reproducible sequence no matter which thread consumes it.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::error::{domain, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    replicate: u64,
    substream: u64,
    rng: ChaCha8Rng,
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, replicate: u64, substream: u64) -> RngStream {
        let k0 = splitmix(seed);
        let k1 = splitmix(k0 ^ splitmix(replicate ^ 0x5EED_0001));
        let k2 = splitmix(k1 ^ splitmix(substream ^ 0x5EED_0002));
        let k3 = splitmix(k2 ^ k0.rotate_left(17));
        let mut key = [0u8; 32];
        for (i, k) in [k0, k1, k2, k3].into_iter().enumerate() {
            key[8 * i..8 * i + 8].copy_from_slice(&k.to_le_bytes());
        }
        RngStream { seed, replicate, substream, rng: ChaCha8Rng::from_seed(key) }
    }

    /// A stream for another substream of the same replicate.
    pub fn fork(&self, substream: u64) -> RngStream {
        RngStream::new(self.seed, self.replicate, substream)
    }

    pub fn path(&self) -> (u64, u64, u64) {
        (self.seed, self.replicate, self.substream)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`; exact zeros are rejected.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    #[inline]
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Poisson count with mean `lambda ≥ 0`.
    #[inline]
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        if lambda < 1e-8 {
            return (self.uniform() < lambda) as u64;
        }
        if lambda < 1e15 {
            return Poisson::new(lambda).expect("positive finite mean").sample(&mut self.rng) as u64;
        }
        // Beyond the range of the exact sampler only a Gaussian shape survives; an
        // infinite mean keeps a uniformly random parity.
        if !lambda.is_finite() {
            return self.rng.next_u64();
        }
        (lambda + lambda.sqrt() * self.gaussian()).round().max(0.0) as u64
    }

    #[inline]
    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        if n == 0 || p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        let (pp, flip) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
        let k = if n as f64 * pp >= 10.0 {
            self.binomial_btrd(n, pp)
        } else {
            Binomial::new(n, pp).expect("valid binomial").sample(&mut self.rng)
        };
        if flip { n - k } else { k }
    }

    /// Transformed rejection with decomposition (Hörmann 1993) for `n p ≥ 10`, `p ≤ 1/2`.
    fn binomial_btrd(&mut self, n: u64, p: f64) -> u64 {
        let nf = n as f64;
        let q = 1.0 - p;
        let m = ((nf + 1.0) * p).floor();
        let r = p / q;
        let sq = (nf * p * q).sqrt();
        let b = 1.15 + 2.53 * sq;
        let a = -0.0873 + 0.0248 * b + 0.01 * p;
        let c = nf * p + 0.5;
        let alpha = (2.83 + 5.1 / b) * sq;
        let vr = 0.92 - 4.2 / b;
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + c).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || k > nf {
                continue;
            }
            let lv = (v * alpha / (a / (us * us) + b)).ln();
            let bound = (m + 0.5) * ((m + 1.0) / (r * (nf - m + 1.0))).ln()
                + (nf + 1.0) * ((nf - m + 1.0) / (nf - k + 1.0)).ln()
                + (k + 0.5) * (r * (nf - k + 1.0) / (k + 1.0)).ln()
                + stirling_tail(m)
                + stirling_tail(nf - m)
                - stirling_tail(k)
                - stirling_tail(nf - k);
            if lv <= bound {
                return k as u64;
            }
        }
    }

    /// Beta(a, b) with `a, b > 0`.
    #[inline]
    pub fn beta(&mut self, a: f64, b: f64) -> f64 {
        if a >= 1.0 && b >= 1.0 {
            let x = Gamma::new(a, 1.0).expect("positive shape").sample(&mut self.rng);
            let y = Gamma::new(b, 1.0).expect("positive shape").sample(&mut self.rng);
            return x / (x + y);
        }
        Beta::new(a, b).expect("positive shapes").sample(&mut self.rng)
    }

    /// Beta-binomial count: `Binomial(n, p)` with `p ~ Beta(a, b)`; `a = 0` gives 0.
    #[inline]
    pub fn beta_binomial(&mut self, n: u64, a: f64, b: f64) -> u64 {
        if n == 0 || a == 0.0 {
            return 0;
        }
        if b == 0.0 {
            return n;
        }
        let p = self.beta(a, b);
        self.binomial(n, p)
    }

    /// Symmetric α-stable variate with `E e^{iθX} = e^{−|θ|^α}` (variance 2 when α = 2).
    pub fn sas(&mut self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("stability index must lie in (0, 2], got {alpha}"));
        }
        Ok(self.sas_unchecked(alpha))
    }

    #[inline]
    pub(crate) fn sas_unchecked(&mut self, alpha: f64) -> f64 {
        if alpha == 2.0 {
            return SQRT_2 * self.gaussian();
        }
        let v = PI * (self.uniform_open() - 0.5);
        if alpha == 1.0 {
            return v.tan();
        }
        let w = self.exp1();
        (alpha * v).sin() / v.cos().powf(1.0 / alpha)
            * ((v * (1.0 - alpha)).cos() / w).powf((1.0 - alpha) / alpha)
    }

    /// Totally skewed β-stable variate with `E e^{−θS} = e^{−rθ^β}`; `β = 1` gives `r`.
    pub fn subordinator(&mut self, beta: f64, r: f64) -> Result<f64> {
        if !(beta > 0.0 && beta <= 1.0) {
            return domain(format!("subordinator index must lie in (0, 1], got {beta}"));
        }
        if !(r > 0.0) {
            return domain(format!("subordinator scale must be > 0, got {r}"));
        }
        Ok(self.subordinator_unchecked(beta, r))
    }

    #[inline]
    pub(crate) fn subordinator_unchecked(&mut self, beta: f64, r: f64) -> f64 {
        if beta == 1.0 {
            return r;
        }
        let u = PI * self.uniform_open();
        let w = self.exp1();
        let s1 = (beta * u).sin() / u.sin().powf(1.0 / beta)
            * (((1.0 - beta) * u).sin() / w).powf((1.0 - beta) / beta);
        r.powf(1.0 / beta) * s1
    }

    /// Arrival times of a rate-`rate` Poisson process on `[0, horizon]`.
    pub fn poisson_path(&mut self, rate: f64, horizon: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if rate <= 0.0 {
            return out;
        }
        let mut t = 0.0;
        loop {
            t += self.exp1() / rate;
            if t > horizon {
                return out;
            }
            out.push(t);
        }
    }

    /// Uniform point on `S²` (Archimedes).
    #[inline]
    pub fn s2_point(&mut self) -> [f64; 3] {
        let z = 2.0 * self.uniform() - 1.0;
        let phi = 2.0 * PI * self.uniform();
        let rho = (1.0 - z * z).max(0.0).sqrt();
        [rho * phi.cos(), rho * phi.sin(), z]
    }

    /// Uniform point on `Sⁿ ⊂ ℝⁿ⁺¹`.
    pub fn sphere_point(&mut self, dim: usize) -> Vec<f64> {
        if dim == 2 {
            return self.s2_point().to_vec();
        }
        loop {
            let v: Vec<f64> = (0..=dim).map(|_| self.gaussian()).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.0 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    /// Poisson point process on `Sⁿ` with intensity `intensity·λ`, where `λ` has total mass π.
    pub fn sphere_ppp(&mut self, dim: usize, intensity: f64) -> Vec<Vec<f64>> {
        let n = self.poisson(intensity * PI);
        (0..n).map(|_| self.sphere_point(dim)).collect()
    }
}

/// `ln k! − [(k + ½) ln(k + 1) − (k + 1) + ½ ln 2π]`.
fn stirling_tail(k: f64) -> f64 {
    const TABLE: [f64; 10] = [
        0.08106146679532726,
        0.04134069595540929,
        0.02767792568499834,
        0.02079067210376509,
        0.01664469118982119,
        0.01387612882307075,
        0.01189670994589177,
        0.01041126526197209,
        0.009255462182712733,
        0.008330563433362871,
    ];
    if k < 10.0 {
        return TABLE[k as usize];
    }
    let k1 = k + 1.0;
    let k2 = k1 * k1;
    (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 / k2) / k2) / k1
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_path_dependent() {
        let mut a = RngStream::new(7, 3, 1);
        let mut b = RngStream::new(7, 3, 1);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_eq!(xa, xb);
        for (s, r, q) in [(8, 3, 1), (7, 4, 1), (7, 3, 2)] {
            let mut c = RngStream::new(s, r, q);
            assert_ne!(xa[0], c.next_u64());
        }
    }

    #[test]
    fn subordinator_unit_index_is_constant() {
        let mut s = RngStream::new(1, 0, 0);
        assert_eq!(s.subordinator(1.0, 2.5).unwrap(), 2.5);
        assert!(s.subordinator(1.5, 1.0).is_err());
        assert!(s.sas(2.5).is_err());
        assert!(s.sas(0.0).is_err());
    }

    #[test]
    fn empty_paths() {
        let mut s = RngStream::new(1, 0, 0);
        assert!(s.poisson_path(0.0, 10.0).is_empty());
        assert_eq!(s.poisson(0.0), 0);
        assert_eq!(s.beta_binomial(5, 0.0, 2.0), 0);
    }

    #[test]
    fn sphere_points_are_unit() {
        let mut s = RngStream::new(2, 0, 0);
        for d in [1, 2, 3] {
            let p = s.sphere_point(d);
            let n: f64 = p.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    fn chi_square(counts: &[u64], probs: &[f64], total: f64) -> (f64, usize) {
        // Pool cells with expected count below 5 into their neighbours.
        let (mut chi, mut df) = (0.0, 0usize);
        let (mut o, mut e) = (0.0, 0.0);
        for (c, p) in counts.iter().zip(probs) {
            o += *c as f64;
            e += p * total;
            if e >= 5.0 {
                chi += (o - e) * (o - e) / e;
                df += 1;
                o = 0.0;
                e = 0.0;
            }
        }
        (chi, df.saturating_sub(1))
    }

    #[test]
    fn binomial_matches_pmf() {
        let mut s = RngStream::new(5, 0, 0);
        for &(n, p) in &[(30u64, 1.0 / 3.0), (1024, 0.3), (1000, 0.02), (50, 0.7), (7, 0.4), (200, 0.5)] {
            let reps = 200_000;
            let mut counts = vec![0u64; n as usize + 1];
            for _ in 0..reps {
                counts[s.binomial(n, p) as usize] += 1;
            }
            let probs: Vec<f64> = (0..=n)
                .map(|k| {
                    let k = k as f64;
                    let nf = n as f64;
                    (libm::lgamma(nf + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(nf - k + 1.0)
                        + k * p.ln()
                        + (nf - k) * (1.0 - p).ln())
                    .exp()
                })
                .collect();
            let (chi, df) = chi_square(&counts, &probs, reps as f64);
            let bound = df as f64 + 5.0 * (2.0 * df as f64).sqrt();
            assert!(chi < bound, "n={n} p={p}: χ² = {chi} with {df} df");
        }
    }

    #[test]
    fn beta_binomial_matches_uniform_composition() {
        // BetaBinomial(N, 1, 1) is uniform on {0, …, N}.
        let mut s = RngStream::new(6, 0, 0);
        let reps = 100_000;
        let mut counts = vec![0u64; 11];
        for _ in 0..reps {
            counts[s.beta_binomial(10, 1.0, 1.0) as usize] += 1;
        }
        let probs = vec![1.0 / 11.0; 11];
        let (chi, df) = chi_square(&counts, &probs, reps as f64);
        assert!(chi < df as f64 + 5.0 * (2.0 * df as f64).sqrt(), "χ² = {chi}");
    }
}

//! Empirical moments, characteristic functions, standard errors and PSD checks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samples::SampleMatrix;

/// A Monte Carlo (or quadrature) estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub n: u64,
    pub target: Option<f64>,
    pub z: Option<f64>,
    pub seed: u64,
    pub plan: serde_json::Value,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, estimate: f64, se: f64, n: u64, seed: u64, plan: serde_json::Value) -> Self {
        EstimateReport { name: name.into(), estimate, se: se.max(0.0), n, target: None, z: None, seed, plan }
    }

    /// Attach a target; the z-score is defined when the SE is positive.
    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self.z = (self.se > 0.0).then(|| (self.estimate - target) / self.se);
        self
    }

    /// `|estimate − target| ≤ k·SE`.
    pub fn within(&self, k: f64) -> bool {
        match self.target {
            Some(t) => (self.estimate - t).abs() <= k * self.se,
            None => false,
        }
    }
}

/// Sample covariance matrix with Wick standard errors `sqrt((C_ii C_jj + C_ij²)/N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub se: DMatrix<f64>,
    pub n: usize,
}

pub fn empirical_cov(samples: &SampleMatrix) -> Result<CovEstimate> {
    let n = samples.rows();
    if n < 2 {
        return Err(Error::Insufficient(format!("covariance needs at least 2 replicates, got {n}")));
    }
    let c = samples.cols();
    let mut mean = vec![0.0; c];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(samples.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(c, c);
    for i in 0..n {
        let row = samples.row(i);
        for a in 0..c {
            let da = row[a] - mean[a];
            for b in a..c {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..c {
        for b in a..c {
            cov[(a, b)] /= (n - 1) as f64;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    let se = DMatrix::from_fn(c, c, |a, b| ((cov[(a, a)] * cov[(b, b)] + cov[(a, b)].powi(2)) / n as f64).sqrt());
    Ok(CovEstimate { mean, cov, se, n })
}

/// Mean and its standard error.
pub fn mean_se(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 2 {
        return Err(Error::Insufficient("mean SE needs at least 2 values".into()));
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((m, (v / n as f64).sqrt()))
}

/// Unbiased sample variance with a moment-based SE `sqrt((m4 − s⁴)/N)`,
/// which stays honest for non-Gaussian columns.
pub fn variance_se(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 4 {
        return Err(Error::Insufficient("variance SE needs at least 4 values".into()));
    }
    let nf = n as f64;
    let m = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in x {
        let d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    let var = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let s2 = m2 / nf;
    Ok((var, ((m4 - s2 * s2).max(0.0) / nf).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChfPoint {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    pub se_re: f64,
    pub se_im: f64,
}

/// Empirical characteristic function `mean(e^{iθX})` with sample SEs of the cos and sin means.
pub fn empirical_chf(x: &[f64], thetas: &[f64]) -> Result<Vec<ChfPoint>> {
    if x.len() < 2 {
        return Err(Error::Insufficient("characteristic function needs at least 2 values".into()));
    }
    thetas
        .iter()
        .map(|&theta| {
            let c: Vec<f64> = x.iter().map(|v| (theta * v).cos()).collect();
            let s: Vec<f64> = x.iter().map(|v| (theta * v).sin()).collect();
            let (re, se_re) = mean_se(&c)?;
            let (im, se_im) = mean_se(&s)?;
            Ok(ChfPoint { theta, re, im, se_re, se_im })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Smallest eigenvalue of a symmetric matrix; passes iff it is `≥ −tolerance`.
pub fn psd_check(m: &DMatrix<f64>, tolerance: f64) -> Result<PsdReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::Domain("PSD check needs a square matrix".into()));
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 {
                return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let min = if m.nrows() == 0 {
        0.0
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    };
    Ok(PsdReport { min_eigenvalue: min, tolerance, passed: min >= -tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_examples() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert!((psd_check(&id, 0.0).unwrap().min_eigenvalue - 1.0).abs() < 1e-15);
        let v = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let r1 = &v * v.transpose();
        let rep = psd_check(&r1, 1e-12).unwrap();
        assert!(rep.min_eigenvalue.abs() < 1e-12 && rep.passed);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(psd_check(&asym, 0.0).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!psd_check(&neg, 1e-8).unwrap().passed);
    }

    #[test]
    fn chf_trivial_cases() {
        let x = [0.3, -1.2, 2.0, 0.7];
        let p = empirical_chf(&x, &[0.0, 1.3, -1.3]).unwrap();
        assert_eq!((p[0].re, p[0].im), (1.0, 0.0));
        assert_eq!(p[2].im, -p[1].im);
        assert!(empirical_chf(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn constant_column_has_zero_variance() {
        let m = SampleMatrix::new(vec!["a".into(), "b".into()], vec![1.0, 2.0, 1.0, 3.0, 1.0, 5.0], serde_json::Value::Null).unwrap();
        let c = empirical_cov(&m).unwrap();
        assert_eq!(c.cov[(0, 0)], 0.0);
        assert!((c.cov[(1, 1)] - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn report_z_score() {
        let r = EstimateReport::new("x", 1.1, 0.05, 100, 1, serde_json::Value::Null).with_target(1.0);
        assert!((r.z.unwrap() - 2.0).abs() < 1e-12);
        assert!(r.within(4.0) && !r.within(1.0));
        let json = serde_json::to_string(&r).unwrap();
        let back: EstimateReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}

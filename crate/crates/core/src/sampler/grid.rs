use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Geometric binning of the frequency variable `r` for the cell scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationGrid {
    pub r_min: f64,
    pub r_max: f64,
    /// Number of geometric bins `B`.
    pub bins: usize,
    /// Path draws per bin `J`.
    pub paths: usize,
}

impl Default for DiscretizationGrid {
    fn default() -> Self {
        DiscretizationGrid { r_min: 1e-4, r_max: 1e4, bins: 400, paths: 8 }
    }
}

/// One bin `[lo, hi]` with its geometric midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub node: f64,
}

impl Bin {
    /// `ln(hi/lo)`, the `dr/r` mass of the bin.
    pub fn log_width(&self) -> f64 {
        (self.hi / self.lo).ln()
    }
}

impl DiscretizationGrid {
    pub fn new(r_min: f64, r_max: f64, bins: usize, paths: usize) -> Result<Self> {
        let g = DiscretizationGrid { r_min, r_max, bins, paths };
        g.validate()?;
        Ok(g)
    }

    /// Default grid for `space`: the sphere stops at `r = 100`.
    pub fn for_space(space: &crate::space::Space) -> Self {
        match space {
            crate::space::Space::Sphere { .. } => DiscretizationGrid { r_min: 1e-4, r_max: 1e2, bins: 120, paths: 8 },
            _ => DiscretizationGrid::default(),
        }
    }

    /// The grid used by the truncated field: `r ≤ 1/ε`.
    pub fn truncated(eps: f64) -> Result<Self> {
        DiscretizationGrid::new(1e-6, 1.0 / eps, 200, 8)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max.is_finite()) {
            return domain(format!("grid needs 0 < r_min and finite r_max, got [{}, {}]", self.r_min, self.r_max));
        }
        if !(self.r_max >= self.r_min * (1.0 + 1e-9)) {
            return domain(format!("grid needs r_max > r_min, got [{}, {}]", self.r_min, self.r_max));
        }
        if self.bins == 0 || self.paths == 0 {
            return domain("grid needs at least one bin and one path per bin");
        }
        Ok(())
    }

    pub fn refined_bins(&self) -> Self {
        DiscretizationGrid { bins: 2 * self.bins, ..*self }
    }

    pub fn bin_list(&self) -> Vec<Bin> {
        let l0 = self.r_min.ln();
        let step = (self.r_max.ln() - l0) / self.bins as f64;
        let edge = |b: usize| match b {
            0 => self.r_min,
            b if b == self.bins => self.r_max,
            b => (l0 + step * b as f64).exp(),
        };
        (0..self.bins)
            .map(|b| {
                let (lo, hi) = (edge(b), edge(b + 1));
                Bin { lo, hi, node: (lo * hi).sqrt() }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_tile_the_range() {
        let g = DiscretizationGrid::default();
        let b = g.bin_list();
        assert_eq!(b.len(), 400);
        assert_eq!(b[0].lo, 1e-4);
        assert_eq!(b[399].hi, 1e4);
        for w in b.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
        let total: f64 = b.iter().map(|x| x.log_width()).sum();
        assert!((total - 1e8f64.ln()).abs() < 1e-9);
        assert!(DiscretizationGrid::new(1.0, 1.0, 4, 4).is_err());
        assert!(DiscretizationGrid::new(0.0, 1.0, 4, 4).is_err());
        assert!(DiscretizationGrid::new(1.0, 2.0, 0, 4).is_err());
    }
}

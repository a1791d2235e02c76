use rand_distr::{Distribution, StandardNormal};

use super::{beta_p, check_finite};
use crate::error::{Error, Result};
use crate::seeds::stream_rng;

/// Default cap on `k·d` for a dense Gaussian matrix (2^26 entries).
pub const DEFAULT_GAUSSIAN_BUDGET: usize = 1 << 26;

/// Dense `k × d` matrix of independent standard normals, scaled by
/// `k^{-1/p} β_p^{-1}` so that `E‖Gx‖_p^p = 1` for unit `x`.
#[derive(Debug, Clone)]
pub struct GaussianBaseline {
    d: usize,
    k: usize,
    p: f64,
    seed: u64,
    scale: f64,
    entries: Vec<f64>,
}

impl GaussianBaseline {
    pub fn new(d: usize, k: usize, p: f64, seed: u64) -> Result<Self> {
        Self::with_budget(d, k, p, seed, DEFAULT_GAUSSIAN_BUDGET)
    }

    pub fn with_budget(d: usize, k: usize, p: f64, seed: u64, budget: usize) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidParameter("d and k must be positive".into()));
        }
        let needed = (k as u128) * (d as u128);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget: budget as u128 });
        }
        let beta = beta_p(p)?;
        let mut rng = stream_rng(seed, 0);
        let entries = (0..k * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        Ok(Self { d, k, p, seed, scale: (k as f64).powf(-1.0 / p) / beta, entries })
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: x.len() });
        }
        check_finite(x)?;
        Ok(self
            .entries
            .chunks_exact(self.d)
            .map(|row| self.scale * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::lp_norm;
    use crate::verify::stats::mean_and_stderr;

    #[test]
    fn shape_linearity_budget() {
        let g = GaussianBaseline::new(32, 4, 1.0, 3).unwrap();
        let x: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..32).map(|i| (i as f64).cos()).collect();
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let (gx, gy, gs) = (g.apply(&x).unwrap(), g.apply(&y).unwrap(), g.apply(&s).unwrap());
        assert_eq!(gx.len(), 4);
        for i in 0..4 {
            assert!((gs[i] - gx[i] - gy[i]).abs() < 1e-12);
        }
        assert!(matches!(
            GaussianBaseline::with_budget(1024, 1024, 1.0, 0, 1 << 19),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn pth_moment_is_one_on_basis_vector() {
        // E‖G e₁‖_p^p = 1 exactly; Monte-Carlo over many seeds.
        for p in [1.0, 1.5, 2.0] {
            let samples: Vec<f64> = (0..100_000u64)
                .map(|s| {
                    let g = GaussianBaseline::new(4, 3, p, s).unwrap();
                    lp_norm(&g.apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(), p).powf(p)
                })
                .collect();
            let (m, se) = mean_and_stderr(&samples);
            assert!((m - 1.0).abs() <= 3.0 * se, "p = {p}: mean {m}, se {se}");
        }
    }
}

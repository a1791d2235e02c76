//! The embedding `Ψx = k^{-1/p} β_p^{-1} · A·D₁·H·D₂·H·D₃·x`.
//!
//! `H` is the orthonormal Walsh–Hadamard transform, `D₁, D₂, D₃` are
//! independent Rademacher diagonals and `A` is the signed 4-wise independent
//! matrix. Inputs are zero-padded to the next power of four.

mod gaussian;
mod moments;
mod spec;

use std::sync::Arc;

use rayon::prelude::*;

pub use gaussian::{GaussianBaseline, DEFAULT_GAUSSIAN_BUDGET};
pub use moments::{beta_p, MomentConstants, DEFAULT_C0};
pub use spec::{TransformSpec, CONVENTION_SIGNED};

use crate::error::{Error, Result};
use crate::fourwise::FourWiseMatrix;
use crate::seeds::SignDiagonal;
use crate::wht;

/// Stream indices of the three diagonals.
pub const STREAM_D1: u64 = 1;
pub const STREAM_D2: u64 = 2;
pub const STREAM_D3: u64 = 3;

/// Smallest power of four that is at least `max(d, 4)`.
pub fn padded_dimension(d: usize) -> usize {
    let mut pad = 4usize;
    while pad < d {
        pad <<= 2;
    }
    pad
}

/// Largest `k` with `k⁴ ≤ d`.
pub fn strict_row_limit(d: usize) -> usize {
    let mut k = (d as f64).powf(0.25).round() as usize;
    while k > 0 && (k as u128).pow(4) > d as u128 {
        k -= 1;
    }
    while ((k + 1) as u128).pow(4) <= d as u128 {
        k += 1;
    }
    k
}

/// Target dimension from the union bound over `n²` normalized differences:
/// `⌈216 ε^{-2} ln(6n²/ρ)⌉`.
pub fn required_k_union(n: usize, eps: f64, rho: f64) -> Result<usize> {
    check_unit_open("eps", eps)?;
    check_unit_open("rho", rho)?;
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let n = n as f64;
    Ok((216.0 * (6.0 * n * n / rho).ln() / (eps * eps)).ceil() as usize)
}

/// Full sufficient dimension `⌈ε^{-2} max{50·C₀, 216 ln(6n²/ρ)}⌉`.
pub fn required_k(n: usize, eps: f64, rho: f64, c0: f64) -> Result<usize> {
    let union = required_k_union(n, eps, rho)?;
    let berry = (50.0 * c0 / (eps * eps)).ceil() as usize;
    Ok(union.max(berry))
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// `ℓ_p` norm.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(p.recip())
}

/// A planned embedding. Immutable; `apply` may be called concurrently.
#[derive(Debug, Clone)]
pub struct Transform {
    d_orig: usize,
    d_pad: usize,
    k: usize,
    p: f64,
    seed: u64,
    strict: bool,
    beta: f64,
    scale: f64,
    diag1: SignDiagonal,
    diag2: SignDiagonal,
    diag3: SignDiagonal,
    matrix: Arc<FourWiseMatrix>,
}

impl Transform {
    /// Plans `Ψ: ℝ^d → ℝ^k`. In strict mode `k ≤ d_pad^{1/4}` is enforced;
    /// `k ≤ √d_pad − 1` is always required by the matrix construction.
    pub fn plan(d: usize, k: usize, p: f64, seed: u64, strict: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let beta = beta_p(p)?;
        let d_pad = padded_dimension(d);
        if strict {
            let limit = strict_row_limit(d_pad);
            if k > limit {
                return Err(Error::StrictDimension { k, limit });
            }
        }
        let matrix = Arc::new(FourWiseMatrix::build(k, d_pad)?);
        Ok(Self::assemble(d, k, p, seed, strict, beta, matrix))
    }

    fn assemble(
        d: usize,
        k: usize,
        p: f64,
        seed: u64,
        strict: bool,
        beta: f64,
        matrix: Arc<FourWiseMatrix>,
    ) -> Self {
        let d_pad = matrix.cols();
        let scale = (k as f64).powf(-1.0 / p) / beta;
        Self {
            d_orig: d,
            d_pad,
            k,
            p,
            seed,
            strict,
            beta,
            scale,
            diag1: SignDiagonal::generate(seed, STREAM_D1, d_pad),
            diag2: SignDiagonal::generate(seed, STREAM_D2, d_pad),
            diag3: SignDiagonal::generate(seed, STREAM_D3, d_pad),
            matrix,
        }
    }

    /// Same dimensions and matrix, fresh diagonals from `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self::assemble(self.d_orig, self.k, self.p, seed, self.strict, self.beta, Arc::clone(&self.matrix))
    }

    /// Same diagonals and matrix, different target exponent.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        let beta = beta_p(p)?;
        let mut out = self.clone();
        out.p = p;
        out.beta = beta;
        out.scale = (self.k as f64).powf(-1.0 / p) / beta;
        Ok(out)
    }

    pub fn input_dim(&self) -> usize {
        self.d_orig
    }

    pub fn padded_dim(&self) -> usize {
        self.d_pad
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

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// True when `k` exceeds `d_pad^{1/4}`, outside the guaranteed regime.
    pub fn is_relaxed(&self) -> bool {
        self.k > strict_row_limit(self.d_pad)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matrix(&self) -> &FourWiseMatrix {
        &self.matrix
    }

    pub fn diagonals(&self) -> [&SignDiagonal; 3] {
        [&self.diag1, &self.diag2, &self.diag3]
    }

    fn padded_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d_orig {
            return Err(Error::DimensionMismatch { expected: self.d_orig, got: x.len() });
        }
        check_finite(x)?;
        let mut buf = vec![0.0; self.d_pad];
        buf[..x.len()].copy_from_slice(x);
        Ok(buf)
    }

    /// `D₁·H·D₂·H·D₃·x` on the padded input; an isometry.
    pub fn precondition(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut buf = self.padded_input(x)?;
        self.precondition_in_place(&mut buf);
        Ok(buf)
    }

    fn precondition_in_place(&self, buf: &mut [f64]) {
        self.diag3.apply(buf);
        wht::wht_in_place(buf);
        self.diag2.apply(buf);
        wht::wht_in_place(buf);
        self.diag1.apply(buf);
    }

    /// Unscaled `A·D₁·H·D₂·H·D₃·x`.
    pub fn apply_unscaled(&self, x: &[f64]) -> Result<Vec<f64>> {
        let buf = self.precondition(x)?;
        self.matrix.multiply_fast(&buf)
    }

    /// `Ψx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.apply_unscaled(x)?;
        for v in y.iter_mut() {
            *v *= self.scale;
        }
        Ok(y)
    }

    /// Applies `Ψ` to every vector; output order follows input order.
    pub fn apply_set(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.par_iter().map(|x| self.apply(x)).collect()
    }

    /// Dense `k × d_orig` matrix of `Ψ` (row-major), for small instances.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k * self.d_orig];
        let mut e = vec![0.0; self.d_orig];
        for j in 0..self.d_orig {
            e[j] = 1.0;
            let col = self.apply(&e).expect("basis vector is valid input");
            for (i, v) in col.into_iter().enumerate() {
                out[i * self.d_orig + j] = v;
            }
            e[j] = 0.0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn padding_and_limits() {
        assert_eq!(padded_dimension(1), 4);
        assert_eq!(padded_dimension(16), 16);
        assert_eq!(padded_dimension(17), 64);
        assert_eq!(padded_dimension(1000), 1024);
        assert_eq!(strict_row_limit(65536), 16);
        assert_eq!(strict_row_limit(1024), 5);
        assert_eq!(strict_row_limit(16), 2);
    }

    #[test]
    fn plan_examples() {
        let t = Transform::plan(1000, 5, 1.0, 7, true).unwrap();
        assert_eq!(t.padded_dim(), 1024);
        let want = (std::f64::consts::PI / 2.0).sqrt() / 5.0;
        assert!((t.scale() - want).abs() < 1e-15);
        let t = Transform::plan(16, 1, 2.0, 0, true).unwrap();
        assert_eq!(t.scale(), 1.0);
        assert!(matches!(
            Transform::plan(1 << 16, 17, 1.0, 0, true),
            Err(Error::StrictDimension { k: 17, limit: 16 })
        ));
        let relaxed = Transform::plan(1 << 16, 17, 1.0, 0, false).unwrap();
        assert!(relaxed.is_relaxed());
        assert!(matches!(Transform::plan(16, 4, 1.0, 0, false), Err(Error::RowsOutOfRange { .. })));
        assert!(Transform::plan(16, 1, 0.9, 0, false).is_err());
        assert!(Transform::plan(0, 1, 1.0, 0, false).is_err());
    }

    #[test]
    fn required_dimension_formulas() {
        let k = required_k_union(10, 0.5, 0.01).unwrap();
        assert_eq!(k, (864.0 * 60000f64.ln()).ceil() as usize);
        let full = required_k(10, 0.5, 0.01, DEFAULT_C0).unwrap();
        let berry = (4.0 * 50.0 * 30.84f64).ceil() as usize;
        assert_eq!(full, k.max(berry));
        assert!(required_k_union(10, 1.5, 0.01).is_err());
    }

    #[test]
    fn apply_is_linear_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = Transform::plan(1000, 5, 1.5, 42, true).unwrap();
        let x = random_vec(&mut rng, 1000);
        let y = random_vec(&mut rng, 1000);
        assert_eq!(t.apply(&vec![0.0; 1000]).unwrap(), vec![0.0; 5]);
        let tx = t.apply(&x).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        for (a, b) in t.apply(&x2).unwrap().iter().zip(&tx) {
            assert!((a - 2.0 * b).abs() < 1e-12 * b.abs().max(1.0));
        }
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let ty = t.apply(&y).unwrap();
        for ((s, a), b) in t.apply(&sum).unwrap().iter().zip(&tx).zip(&ty) {
            assert!((s - a - b).abs() < 1e-12);
        }
        let again = Transform::plan(1000, 5, 1.5, 42, true).unwrap();
        assert_eq!(again.apply(&x).unwrap(), tx);
    }

    #[test]
    fn matches_dense_materialization() {
        // Ψ = scale · A · D1 · H · D2 · H · D3 built from dense factors.
        let t = Transform::plan(16, 1, 2.0, 0, true).unwrap();
        let d = 16;
        let h = {
            let mut m = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    let s = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    m[i * d + j] = s / 4.0;
                }
            }
            m
        };
        let [d1, d2, d3] = t.diagonals().map(|g| g.to_vec());
        let a = t.matrix().to_dense();
        // Compose right to left on the identity.
        let mut cols = vec![0.0; d * d];
        for j in 0..d {
            let mut v = vec![0.0; d];
            v[j] = d3[j];
            let v: Vec<f64> = (0..d).map(|r| (0..d).map(|c| h[r * d + c] * v[c]).sum()).collect();
            let v: Vec<f64> = v.iter().zip(&d2).map(|(a, b)| a * b).collect();
            let v: Vec<f64> = (0..d).map(|r| (0..d).map(|c| h[r * d + c] * v[c]).sum()).collect();
            let v: Vec<f64> = v.iter().zip(&d1).map(|(a, b)| a * b).collect();
            for r in 0..d {
                cols[r * d + j] = v[r];
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_vec(&mut rng, d);
        let pre: Vec<f64> = (0..d).map(|r| (0..d).map(|c| cols[r * d + c] * x[c]).sum()).collect();
        let want: f64 = t.scale() * a.iter().zip(&pre).map(|(u, v)| u * v).sum::<f64>();
        let got = t.apply(&x).unwrap()[0];
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn preconditioner_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = Transform::plan(3000, 4, 1.0, 1, true).unwrap();
        let x = random_vec(&mut rng, 3000);
        let z = t.precondition(&x).unwrap();
        let (nx, nz) = (lp_norm(&x, 2.0), lp_norm(&z, 2.0));
        assert!((nx - nz).abs() < 1e-12 * nx);
    }

    #[test]
    fn input_validation() {
        let t = Transform::plan(10, 1, 1.0, 1, true).unwrap();
        assert!(matches!(t.apply(&[0.0; 9]), Err(Error::DimensionMismatch { expected: 10, got: 9 })));
        let mut x = vec![0.0; 10];
        x[3] = f64::INFINITY;
        assert!(matches!(t.apply(&x), Err(Error::NonFinite(3))));
    }

    #[test]
    fn apply_set_preserves_order_and_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = Transform::plan(256, 4, 1.0, 9, true).unwrap();
        assert!(t.apply_set(&[]).unwrap().is_empty());
        let xs: Vec<Vec<f64>> = (0..8).map(|_| random_vec(&mut rng, 256)).collect();
        let ys = t.apply_set(&xs).unwrap();
        assert_eq!(ys[0], t.apply(&xs[0]).unwrap());
        for i in 0..8 {
            for j in 0..8 {
                let diff: Vec<f64> = xs[i].iter().zip(&xs[j]).map(|(a, b)| a - b).collect();
                let direct = lp_norm(&t.apply(&diff).unwrap(), 1.0);
                let via: Vec<f64> = ys[i].iter().zip(&ys[j]).map(|(a, b)| a - b).collect();
                assert!((lp_norm(&via, 1.0) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reseeding_changes_only_diagonals() {
        let t = Transform::plan(64, 2, 1.0, 1, true).unwrap();
        let u = t.reseeded(2);
        assert_eq!(u.seed(), 2);
        assert_eq!(u.scale(), t.scale());
        assert_ne!(u.diagonals()[0], t.diagonals()[0]);
        let v = t.with_exponent(2.0).unwrap();
        assert_eq!(v.diagonals()[0], t.diagonals()[0]);
        assert!((v.scale() - 2f64.powf(-0.5)).abs() < 1e-15);
    }
}

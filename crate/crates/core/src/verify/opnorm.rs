use rand_distr::{Distribution, StandardNormal};

use super::{check_unit, VerificationReport};
use crate::embed::lp_norm;
use crate::error::{Error, Result};
use crate::fourwise::FourWiseMatrix;
use crate::seeds::{derive_seed, stream_rng};

pub const DEFAULT_POWER_TOL: f64 = 1e-9;

/// Materialization limit for `k·d`.
const DENSE_LIMIT: usize = 1 << 24;

/// Dense `k × d` matrix with column `j` equal to `x_j` times column `j` of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnScaledMatrix {
    k: usize,
    d: usize,
    entries: Vec<f64>,
}

impl ColumnScaledMatrix {
    pub fn new(a: &FourWiseMatrix, x: &[f64]) -> Result<Self> {
        let (k, d) = (a.rows(), a.cols());
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        check_dense(k, d)?;
        let mut entries = a.to_dense();
        for row in entries.chunks_exact_mut(d) {
            for (m, xj) in row.iter_mut().zip(x) {
                *m *= xj;
            }
        }
        Ok(Self { k, d, entries })
    }

    /// Wraps an arbitrary row-major matrix.
    pub fn from_dense(k: usize, d: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != k * d {
            return Err(Error::DimensionMismatch { expected: k * d, got: entries.len() });
        }
        Ok(Self { k, d, entries })
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    fn mul(&self, v: &[f64]) -> Vec<f64> {
        self.entries.chunks_exact(self.d).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn mul_t(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (row, ui) in self.entries.chunks_exact(self.d).zip(u) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m * ui;
            }
        }
        out
    }
}

fn check_dense(k: usize, d: usize) -> Result<()> {
    if k.saturating_mul(d) > DENSE_LIMIT {
        return Err(Error::BudgetExceeded { needed: k as u128 * d as u128, budget: DENSE_LIMIT as u128 });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of `M` by power iteration on `MᵀM`.
///
/// Stops when the estimate changes by less than `DEFAULT_POWER_TOL`
/// (relative); otherwise returns the last estimate flagged unconverged.
pub fn opnorm_2to2(m: &ColumnScaledMatrix, iterations: usize) -> OpNormEstimate {
    // Deterministic start with no exact symmetry.
    let mut v: Vec<f64> = (0..m.d).map(|j| 1.0 + 0.5 * ((j as f64 + 1.0) * 0.618_033_988_75).fract()).collect();
    let norm = lp_norm(&v, 2.0);
    v.iter_mut().for_each(|x| *x /= norm);
    let mut estimate = 0.0;
    for it in 1..=iterations {
        let w = m.mul_t(&m.mul(&v));
        let wn = lp_norm(&w, 2.0);
        if wn == 0.0 {
            return OpNormEstimate { value: 0.0, iterations: it, converged: true };
        }
        // Rayleigh quotient vᵀMᵀMv = ‖Mv‖² with unit v.
        let next = lp_norm(&m.mul(&v), 2.0);
        v = w.into_iter().map(|x| x / wn).collect();
        if (next - estimate).abs() <= DEFAULT_POWER_TOL * next {
            let value = lp_norm(&m.mul(&v), 2.0).max(next);
            return OpNormEstimate { value, iterations: it, converged: true };
        }
        estimate = next;
    }
    OpNormEstimate { value: estimate.max(lp_norm(&m.mul(&v), 2.0)), iterations, converged: false }
}

fn l4_of_transpose(dense: &[f64], k: usize, d: usize, u: &[f64]) -> (f64, Vec<f64>) {
    let mut y = vec![0.0; d];
    for (row, ui) in dense.chunks_exact(d).zip(u).take(k) {
        for (o, a) in y.iter_mut().zip(row) {
            *o += a * ui;
        }
    }
    (lp_norm(&y, 4.0), y)
}

fn ascend(dense: &[f64], k: usize, d: usize, mut u: Vec<f64>) -> f64 {
    let (mut best, mut y) = l4_of_transpose(dense, k, d, &u);
    for _ in 0..1000 {
        // Gradient of ‖Aᵀu‖₄⁴ is 4·A·(Aᵀu)³; for a convex objective the
        // normalized gradient step never decreases it.
        let cubes: Vec<f64> = y.iter().map(|v| v * v * v).collect();
        let g: Vec<f64> = dense.chunks_exact(d).map(|row| row.iter().zip(&cubes).map(|(a, c)| a * c).sum()).collect();
        let gn = lp_norm(&g, 2.0);
        if gn == 0.0 {
            break;
        }
        u = g.into_iter().map(|v| v / gn).collect();
        let (value, next_y) = l4_of_transpose(dense, k, d, &u);
        y = next_y;
        if value <= best * (1.0 + 1e-13) {
            best = best.max(value);
            break;
        }
        best = value;
    }
    best
}

/// Lower bound on `‖Aᵀ‖_{2→4}` from normalized-gradient ascent over the unit
/// sphere. With `restarts = 0` returns `‖Aᵀe₁‖₄`; otherwise ascends from
/// `e₁` and from `restarts` random starts and returns the best value.
pub fn opnorm_2to4_lower(a: &FourWiseMatrix, restarts: usize, seed: u64) -> Result<f64> {
    let (k, d) = (a.rows(), a.cols());
    check_dense(k, d)?;
    let dense = a.to_dense();
    let mut e1 = vec![0.0; k];
    e1[0] = 1.0;
    let canonical = l4_of_transpose(&dense, k, d, &e1).0;
    if restarts == 0 {
        return Ok(canonical);
    }
    let mut best = canonical.max(ascend(&dense, k, d, e1));
    for r in 0..restarts {
        let mut rng = stream_rng(derive_seed(seed, r as u64), 0);
        let mut u: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = lp_norm(&u, 2.0);
        u.iter_mut().for_each(|v| *v /= n);
        best = best.max(ascend(&dense, k, d, u));
    }
    Ok(best)
}

/// Checks `‖M‖₂→₂ ≤ ‖x‖₄·(3d)^{1/4}` over the given unit vectors and the
/// ascent lower bound `‖Aᵀ‖₂→₄ ≤ (3d)^{1/4}`.
pub fn opnorm_check(
    a: &FourWiseMatrix,
    xs: &[Vec<f64>],
    iterations: usize,
    restarts: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let d = a.cols();
    let cap = (3.0 * d as f64).powf(0.25);
    let mut worst_ratio = 0.0f64;
    let mut violations = 0u64;
    let mut unconverged = 0u64;
    for x in xs {
        check_unit(x)?;
        let m = ColumnScaledMatrix::new(a, x)?;
        let est = opnorm_2to2(&m, iterations);
        let bound = lp_norm(x, 4.0) * cap;
        if est.value > bound + 1e-9 {
            violations += 1;
        }
        if !est.converged {
            unconverged += 1;
        }
        worst_ratio = worst_ratio.max(est.value / bound);
    }
    let lower = opnorm_2to4_lower(a, restarts, seed)?;
    let mut r = VerificationReport::new("opnorm")
        .param("k", a.rows())
        .param("d", d)
        .param("vectors", xs.len())
        .param("violations", violations)
        .param("unconverged", unconverged)
        .param("a_t_2to4_lower", lower)
        .param("a_t_2to4_bound", cap)
        .param("restarts", restarts)
        .exact(worst_ratio);
    r.bound = 1.0;
    r.trials = xs.len() as u64;
    r.seed = Some(seed);
    r.pass = violations == 0 && lower <= cap + 1e-9;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::basis_vector;

    #[test]
    fn identity_block() {
        let mut e = vec![0.0; 16];
        for i in 0..4 {
            e[i * 4 + i] = 1.0;
        }
        let m = ColumnScaledMatrix::from_dense(4, 4, e).unwrap();
        let est = opnorm_2to2(&m, 100);
        assert!(est.converged && (est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_column() {
        let a = FourWiseMatrix::build(8, 256).unwrap();
        let m = ColumnScaledMatrix::new(&a, &basis_vector(256, 0)).unwrap();
        assert_eq!(m.entry(3, 0), a.entry(3, 0).unwrap() as f64);
        assert_eq!(m.entry(3, 1), 0.0);
        let est = opnorm_2to2(&m, 100);
        assert!((est.value - 8f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn power_iteration_matches_closed_form_rank_one() {
        // u vᵀ has norm ‖u‖‖v‖.
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 0.1, -0.7, 2.0];
        let entries: Vec<f64> = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        let m = ColumnScaledMatrix::from_dense(3, 4, entries).unwrap();
        let want = lp_norm(&u, 2.0) * lp_norm(&v, 2.0);
        assert!((opnorm_2to2(&m, 200).value - want).abs() < 1e-9 * want);
    }

    #[test]
    fn two_to_four_lower_bound() {
        let a = FourWiseMatrix::build(1, 16).unwrap();
        assert!((opnorm_2to4_lower(&a, 5, 0).unwrap() - 2.0).abs() < 1e-12);
        let a = FourWiseMatrix::build(8, 256).unwrap();
        let canonical = opnorm_2to4_lower(&a, 0, 0).unwrap();
        assert!((canonical - 4.0).abs() < 1e-12);
        let best = opnorm_2to4_lower(&a, 10, 1).unwrap();
        assert!(best >= canonical && best <= 768f64.powf(0.25) + 1e-9);
    }
}

//! The signed `k × d` 4-wise independent matrix.
//!
//! Column `j` of a `d = 4^m` wide matrix is split into `(a, b) ∈ GF(2^m)²`
//! (high and low `m` bits) and row `i` is attached to the nonzero element
//! `x_i = i + 1`. The entry is
//!
//! ```text
//! A[i, (a, b)] = (−1)^(Tr(a·x_i) + Tr(b·x_i³))
//! ```
//!
//! which is a codeword of the dual of the double-error-correcting BCH code.
//! Any four rows are linearly independent functionals of `(a, b)`, so every
//! sign pattern on four rows occurs in exactly `d/16` columns.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf2m::FieldSpec;
use crate::verify::VerificationReport;
use crate::wht::{self, IndexSet};

/// Default limit on entry evaluations for [`FourWiseMatrix::verify_strength4`].
pub const DEFAULT_STRENGTH_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Clone)]
pub struct FourWiseMatrix {
    k: usize,
    d: usize,
    field: Arc<FieldSpec>,
    row_points: Vec<u32>,
    row_cubes: Vec<u32>,
    /// `σ(x_i)`: the sign over `a` is `parity(a & mask)`.
    outer_masks: Vec<u32>,
    /// Distinct `σ(x_i³)` values, the inner transform outputs.
    inner_outputs: IndexSet,
    /// Position of row `i`'s `σ(x_i³)` inside `inner_outputs`.
    inner_slot: Vec<usize>,
}

/// Exponent `m` with `d = 4^m`, if any.
pub fn power_of_four_exponent(d: usize) -> Option<u32> {
    if d.is_power_of_two() && d.trailing_zeros() % 2 == 0 {
        Some(d.trailing_zeros() / 2)
    } else {
        None
    }
}

/// Largest row count the construction supports for width `d`.
pub fn max_rows(d: usize) -> usize {
    power_of_four_exponent(d).map_or(0, |m| (1usize << m) - 1)
}

#[inline]
fn sign_of_parity(bits: u32) -> f64 {
    f64::from_bits(1f64.to_bits() ^ ((bits.count_ones() as u64 & 1) << 63))
}

impl FourWiseMatrix {
    /// Builds the `k × d` matrix. `d` must be `4^m` with `m ≥ 1` and
    /// `1 ≤ k ≤ √d − 1`.
    pub fn build(k: usize, d: usize) -> Result<Self> {
        let m = match power_of_four_exponent(d) {
            Some(m) if m >= 1 => m,
            _ => return Err(Error::NotPowerOfFour(d)),
        };
        let field = FieldSpec::new(m)?;
        Self::with_field(k, Arc::new(field))
    }

    /// Builds the matrix over an existing field; `d = 4^degree`.
    pub fn with_field(k: usize, field: Arc<FieldSpec>) -> Result<Self> {
        let m = field.degree();
        if 2 * m as usize >= usize::BITS as usize {
            return Err(Error::InvalidParameter(format!("field degree {m} too large for usize columns")));
        }
        let d = 1usize << (2 * m);
        let max = (1usize << m) - 1;
        if k == 0 || k > max {
            return Err(Error::RowsOutOfRange { k, max });
        }
        let row_points: Vec<u32> = (1..=k as u32).collect();
        let row_cubes: Vec<u32> = row_points.iter().map(|&x| field.cube(x)).collect();
        let outer_masks = row_points.iter().map(|&x| field.form_map(x)).collect();
        let inner_keys: Vec<usize> = row_cubes.iter().map(|&c| field.form_map(c) as usize).collect();
        let inner_outputs = IndexSet::from_unsorted(inner_keys.clone())?;
        let inner_slot = inner_keys
            .iter()
            .map(|key| inner_outputs.position(*key).expect("key is in the set"))
            .collect();
        Ok(Self { k, d, field, row_points, row_cubes, outer_masks, inner_outputs, inner_slot })
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn row_points(&self) -> &[u32] {
        &self.row_points
    }

    fn half_bits(&self) -> u32 {
        self.field.degree()
    }

    /// Entry `A[i, j] ∈ {−1, +1}` evaluated from the trace definition.
    pub fn entry(&self, i: usize, j: usize) -> Result<i8> {
        if i >= self.k {
            return Err(Error::IndexOutOfRange { index: i, len: self.k });
        }
        if j >= self.d {
            return Err(Error::IndexOutOfRange { index: j, len: self.d });
        }
        Ok(self.entry_unchecked(i, j))
    }

    #[inline]
    fn entry_unchecked(&self, i: usize, j: usize) -> i8 {
        let m = self.half_bits();
        let a = (j >> m) as u32;
        let b = (j & ((1usize << m) - 1)) as u32;
        let f = &*self.field;
        let bit = f.trace(f.mul(a, self.row_points[i])) ^ f.trace(f.mul(b, self.row_cubes[i]));
        1 - 2 * bit as i8
    }

    /// Row-major dense copy; intended for small instances.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k * self.d);
        for i in 0..self.k {
            out.extend((0..self.d).map(|j| self.entry_unchecked(i, j) as f64));
        }
        out
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: v.len() });
        }
        Ok(())
    }

    /// `A·v` by direct summation over all `k·d` entries.
    pub fn multiply_explicit(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let n = 1usize << self.half_bits();
        let f = &*self.field;
        let mut out = Vec::with_capacity(self.k);
        for i in 0..self.k {
            let outer: Vec<f64> =
                (0..n as u32).map(|a| 1.0 - 2.0 * f.trace(f.mul(a, self.row_points[i])) as f64).collect();
            let inner: Vec<f64> =
                (0..n as u32).map(|b| 1.0 - 2.0 * f.trace(f.mul(b, self.row_cubes[i])) as f64).collect();
            let mut acc = 0.0;
            for (row, sa) in v.chunks_exact(n).zip(&outer) {
                for (x, sb) in row.iter().zip(&inner) {
                    acc += sa * sb * x;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `A·v` in `O(d log k)` operations.
    ///
    /// `v` is viewed as an `n × n` array `V[a][b]` with `n = √d`. For each
    /// `a`, a partial transform of `V[a][·]` yields
    /// `W[a][c] = Σ_b (−1)^Tr(b·c) V[a][b]` at the needed cubes `c = x_i³`,
    /// and then `y_i = Σ_a (−1)^Tr(a·x_i) W[a][x_i³]`.
    pub fn multiply_fast(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let n = 1usize << self.half_bits();
        let outputs = self.inner_outputs.as_slice();
        let r = outputs.len();
        let mut partial = vec![0.0; n * r];
        let mut plan = wht::PartialPlan::new(outputs, n);
        for (row, w) in v.chunks_exact(n).zip(partial.chunks_exact_mut(r)) {
            plan.run(row, w);
        }
        let out = (0..self.k)
            .map(|i| {
                let mask = self.outer_masks[i];
                let slot = self.inner_slot[i];
                partial
                    .chunks_exact(r)
                    .enumerate()
                    .map(|(a, w)| sign_of_parity(a as u32 & mask) * w[slot])
                    .sum()
            })
            .collect();
        Ok(out)
    }

    /// `Aᵀ·u` by direct summation (small instances).
    pub fn transpose_multiply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: u.len() });
        }
        Ok((0..self.d)
            .map(|j| (0..self.k).map(|i| self.entry_unchecked(i, j) as f64 * u[i]).sum())
            .collect())
    }

    /// Exhaustively counts sign patterns on every 4-subset of rows.
    ///
    /// With fewer than four rows all `min(k, 4)`-subsets are counted instead;
    /// such a matrix is vacuously 4-wise independent. If
    /// `C(k, 4)·d > budget` only a prefix of the subsets is checked and the
    /// report does not pass.
    pub fn verify_strength4(&self, budget: u128) -> VerificationReport {
        let t = self.k.min(4);
        let tuples = combinations(self.k, t);
        let total = tuples.len() as u128;
        let per_tuple = self.d as u128;
        let affordable = (budget / per_tuple.max(1)).min(total);
        let expected = (self.d >> t) as u64;

        let words = self.d.div_ceil(64);
        let row_bits: Vec<Vec<u64>> = (0..self.k)
            .map(|i| {
                let mut bits = vec![0u64; words];
                for j in 0..self.d {
                    if self.entry_unchecked(i, j) < 0 {
                        bits[j / 64] |= 1 << (j % 64);
                    }
                }
                bits
            })
            .collect();
        let tail_mask = if self.d % 64 == 0 { u64::MAX } else { (1u64 << (self.d % 64)) - 1 };

        let mut bad_cells = 0u64;
        let mut min_count = u64::MAX;
        let mut max_count = 0u64;
        for tuple in tuples.iter().take(affordable as usize) {
            for pattern in 0..1u32 << t {
                let mut count = 0u64;
                for w in 0..words {
                    let mut acc = if w + 1 == words { tail_mask } else { u64::MAX };
                    for (pos, &row) in tuple.iter().enumerate() {
                        let bits = row_bits[row][w];
                        acc &= if pattern >> pos & 1 == 1 { bits } else { !bits };
                    }
                    count += acc.count_ones() as u64;
                }
                min_count = min_count.min(count);
                max_count = max_count.max(count);
                if count != expected {
                    bad_cells += 1;
                }
            }
        }
        let complete = affordable == total;
        let coverage = if total == 0 { 1.0 } else { affordable as f64 / total as f64 };
        let mut report = VerificationReport::new("fourwise")
            .param("k", self.k)
            .param("d", self.d)
            .param("tuple_size", t)
            .param("tuples_checked", affordable as u64)
            .param("tuples_total", total as u64)
            .param("coverage", coverage)
            .param("expected_count", expected)
            .param("min_count", if affordable == 0 { 0 } else { min_count })
            .param("max_count", max_count)
            .param("budget", budget as u64)
            .exact(bad_cells as f64);
        report.bound = 0.0;
        report.trials = affordable as u64 * (1u64 << t);
        report.pass = complete && bad_cells == 0;
        if t < 4 {
            report = report.note("fewer than four rows: 4-wise independence holds vacuously");
        }
        if !complete {
            report = report.note("work budget exceeded: partial coverage only");
        }
        report
    }
}

/// All `t`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if t > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        out.push(idx.clone());
        let mut pos = t;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < n - t + pos {
                break;
            }
            if pos == 0 {
                return out;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..t {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-300);
        num / den
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(15, 4).len(), 1365);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(4, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn shape_validation() {
        assert!(matches!(FourWiseMatrix::build(1, 8), Err(Error::NotPowerOfFour(8))));
        assert!(matches!(FourWiseMatrix::build(1, 1), Err(Error::NotPowerOfFour(1))));
        assert!(matches!(FourWiseMatrix::build(4, 16), Err(Error::RowsOutOfRange { k: 4, max: 3 })));
        assert!(matches!(FourWiseMatrix::build(0, 16), Err(Error::RowsOutOfRange { .. })));
        assert_eq!(max_rows(65536), 255);
        assert_eq!(max_rows(32), 0);
    }

    #[test]
    fn single_row_is_balanced() {
        let a = FourWiseMatrix::build(1, 16).unwrap();
        let plus = (0..16).filter(|&j| a.entry(0, j).unwrap() > 0).count();
        assert_eq!(plus, 8);
    }

    #[test]
    fn pairs_balanced_at_d16() {
        let a = FourWiseMatrix::build(2, 16).unwrap();
        let mut counts = [0; 4];
        for j in 0..16 {
            let p = (a.entry(0, j).unwrap() < 0) as usize | ((a.entry(1, j).unwrap() < 0) as usize) << 1;
            counts[p] += 1;
        }
        assert_eq!(counts, [4; 4]);
    }

    /// Codeword table for (k, d) = (3, 16) written out from the trace
    /// definition over GF(4) with modulus x²+x+1, independently of FieldSpec.
    #[test]
    fn entries_match_explicit_codewords() {
        // GF(4) = {0, 1, w, w+1} encoded 0..4; w² = w + 1.
        let mul = |a: u32, b: u32| -> u32 {
            let table = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
            table[a as usize][b as usize]
        };
        // Tr(z) = z + z²: Tr(0)=0, Tr(1)=0, Tr(w)=1, Tr(w+1)=1.
        let tr = |z: u32| -> i8 { [0, 0, 1, 1][z as usize] };
        let a = FourWiseMatrix::build(3, 16).unwrap();
        for i in 0..3u32 {
            let x = i + 1;
            let x3 = mul(mul(x, x), x);
            for j in 0..16u32 {
                let (hi, lo) = (j >> 2, j & 3);
                let bit = tr(mul(hi, x)) ^ tr(mul(lo, x3));
                assert_eq!(a.entry(i as usize, j as usize).unwrap(), 1 - 2 * bit);
            }
        }
    }

    #[test]
    fn entry_basics() {
        let a = FourWiseMatrix::build(8, 256).unwrap();
        for i in 0..8 {
            assert_eq!(a.entry(i, 0).unwrap(), 1);
            let row_sum: i32 = (0..256).map(|j| a.entry(i, j).unwrap() as i32).sum();
            assert_eq!(row_sum, 0);
            for j in 0..256 {
                assert!(matches!(a.entry(i, j).unwrap(), 1 | -1));
            }
        }
        assert!(a.entry(8, 0).is_err());
        assert!(a.entry(0, 256).is_err());
    }

    #[test]
    fn rows_are_hadamard_rows_at_form_keys() {
        // Independent characterization: row i equals the Hadamard row with
        // index (σ(x_i) << m) | σ(x_i³).
        let a = FourWiseMatrix::build(8, 256).unwrap();
        let f = a.field();
        for i in 0..8 {
            let x = a.row_points()[i];
            let key = ((f.form_map(x) as usize) << 4) | f.form_map(f.cube(x)) as usize;
            for j in 0..256 {
                let want = if (key & j).count_ones() % 2 == 0 { 1 } else { -1 };
                assert_eq!(a.entry(i, j).unwrap(), want);
            }
        }
    }

    #[test]
    fn multiply_basics() {
        let a = FourWiseMatrix::build(8, 256).unwrap();
        let zero = vec![0.0; 256];
        assert_eq!(a.multiply_explicit(&zero).unwrap(), vec![0.0; 8]);
        assert_eq!(a.multiply_fast(&zero).unwrap(), vec![0.0; 8]);
        let mut e0 = zero.clone();
        e0[0] = 1.0;
        assert_eq!(a.multiply_explicit(&e0).unwrap(), vec![1.0; 8]);
        assert_eq!(a.multiply_fast(&e0).unwrap(), vec![1.0; 8]);
        assert!(matches!(
            a.multiply_fast(&[0.0; 16]),
            Err(Error::DimensionMismatch { expected: 256, got: 16 })
        ));
    }

    #[test]
    fn fast_matches_explicit_and_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (k, d) in [(1, 4), (3, 16), (7, 64), (8, 256), (15, 256), (31, 1024)] {
            let a = FourWiseMatrix::build(k, d).unwrap();
            let dense = a.to_dense();
            for _ in 0..5 {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let want: Vec<f64> =
                    dense.chunks_exact(d).map(|row| row.iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
                assert!(rel_err(&a.multiply_explicit(&v).unwrap(), &want) < 1e-12);
                assert!(rel_err(&a.multiply_fast(&v).unwrap(), &want) < 1e-10, "(k,d)=({k},{d})");
            }
        }
    }

    #[test]
    fn strength4_small_cases() {
        let r = FourWiseMatrix::build(8, 256).unwrap().verify_strength4(DEFAULT_STRENGTH_BUDGET);
        assert!(r.pass, "{}", r.to_json());
        assert_eq!(r.get_f64("min_count"), Some(16.0));
        assert_eq!(r.get_f64("max_count"), Some(16.0));
        // m = 2: k ≤ 3, vacuous but counted on all triples.
        let r = FourWiseMatrix::build(3, 16).unwrap().verify_strength4(DEFAULT_STRENGTH_BUDGET);
        assert!(r.pass);
        assert_eq!(r.get_f64("tuple_size"), Some(3.0));
        assert_eq!(r.get_f64("expected_count"), Some(2.0));
    }

    #[test]
    fn strength4_budget_exceeded() {
        let r = FourWiseMatrix::build(8, 256).unwrap().verify_strength4(256 * 10);
        assert!(!r.pass);
        assert_eq!(r.get_f64("tuples_checked"), Some(10.0));
        assert!(r.get_f64("coverage").unwrap() < 1.0);
    }

    #[test]
    fn strength4_detects_dependent_rows() {
        // A matrix whose rows include x, y, z, x+y+z style dependencies
        // would fail; emulate by duplicating a row in the bitset check.
        let a = FourWiseMatrix::build(4, 64).unwrap();
        let mut broken = a.clone();
        broken.row_points[3] = broken.row_points[0];
        broken.row_cubes[3] = broken.row_cubes[0];
        assert!(a.verify_strength4(DEFAULT_STRENGTH_BUDGET).pass);
        assert!(!broken.verify_strength4(DEFAULT_STRENGTH_BUDGET).pass);
    }
}

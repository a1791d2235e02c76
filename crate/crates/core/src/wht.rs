//! Fast Walsh–Hadamard transforms.
//!
//! The orthonormal transform `H_d` is defined recursively with a `1/√2`
//! factor per level. All variants here run the unnormalized ±1 butterfly and
//! apply a single `d^{-1/2}` multiplication at the end when normalization is
//! wanted, so the per-level roundings of the scaled recursion never occur.
//!
//! [`wht_partial`] evaluates only a chosen subset of outputs using the
//! Kronecker split `H_d = H_{d/B} ⊗ H_B`, where `B` is the smallest power of
//! two at least the number of requested outputs.

use crate::error::{Error, Result};

/// Levels with stride below this many elements are run block by block so a
/// block stays resident in L1/L2 while its low levels are processed.
const CACHE_BLOCK: usize = 1 << 12;

/// Strictly increasing, non-empty set of output positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Validates that `indices` is non-empty and strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet);
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of `index` within the set, if present.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.0.binary_search(&index).ok()
    }
}

fn check_input(x: &[f64]) -> Result<()> {
    if !x.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(x.len()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Elements per pass of the partial transform.
const PARTIAL_SPAN: usize = 4096;

#[inline]
fn signed(v: f64, a: usize, b: usize) -> f64 {
    (1.0 - 2.0 * ((a & b).count_ones() & 1) as f64) * v
}

fn butterfly_levels(buf: &mut [f64], from: usize, to: usize) {
    let mut h = from;
    if h == 1 && to >= 4 {
        for q in buf.chunks_exact_mut(4) {
            let (a, b) = (q[0] + q[1], q[0] - q[1]);
            let (c, d) = (q[2] + q[3], q[2] - q[3]);
            q[0] = a + c;
            q[1] = b + d;
            q[2] = a - c;
            q[3] = b - d;
        }
        h = 4;
    }
    while h < to {
        for chunk in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h <<= 1;
    }
}

/// Unnormalized in-place butterfly: `buf[u] <- Σ_w (−1)^{popcount(u & w)} buf[w]`.
///
/// `buf.len()` must be a power of two; this is not checked in release builds.
pub fn butterfly_in_place(buf: &mut [f64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    let block = CACHE_BLOCK.min(n);
    for chunk in buf.chunks_exact_mut(block) {
        butterfly_levels(chunk, 1, block);
    }
    butterfly_levels(buf, block, n);
}

/// Orthonormal transform in place. Length must be a power of two.
pub fn wht_in_place(buf: &mut [f64]) {
    butterfly_in_place(buf);
    let scale = (buf.len() as f64).sqrt().recip();
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Returns `H_d x` for the orthonormal Walsh–Hadamard matrix.
pub fn wht_full(x: &[f64]) -> Result<Vec<f64>> {
    check_input(x)?;
    let mut out = x.to_vec();
    wht_in_place(&mut out);
    Ok(out)
}

/// Returns the ±1-matrix transform, equal to `√d · wht_full(x)`.
pub fn wht_unnormalized(x: &[f64]) -> Result<Vec<f64>> {
    check_input(x)?;
    let mut out = x.to_vec();
    butterfly_in_place(&mut out);
    Ok(out)
}

/// `H_d x` restricted to `outputs`, in `O(d log r + d)` operations.
pub fn wht_partial(x: &[f64], outputs: &IndexSet) -> Result<Vec<f64>> {
    let mut out = wht_partial_unnormalized(x, outputs)?;
    let scale = (x.len() as f64).sqrt().recip();
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// Unnormalized (±1) transform restricted to `outputs`.
pub fn wht_partial_unnormalized(x: &[f64], outputs: &IndexSet) -> Result<Vec<f64>> {
    check_input(x)?;
    let d = x.len();
    if let Some(&last) = outputs.as_slice().last() {
        if last >= d {
            return Err(Error::IndexOutOfRange { index: last, len: d });
        }
    }
    let mut out = vec![0.0; outputs.len()];
    PartialPlan::new(outputs.as_slice(), d).run(x, &mut out);
    Ok(out)
}

/// Block size used for `r` requested outputs out of `d`.
pub fn partial_block_size(r: usize, d: usize) -> usize {
    r.max(1).next_power_of_two().min(d.max(1))
}

/// Precomputed layout of a partial transform for fixed outputs and length.
///
/// Blocks are processed a span at a time. Within a span the combine signs
/// depend only on the block offset, so they are tabulated once per output.
pub(crate) struct PartialPlan<'a> {
    outputs: &'a [usize],
    block: usize,
    span: usize,
    span_shift: u32,
    low_signs: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> PartialPlan<'a> {
    /// `outputs` must be in range for length `d`; no validation is done here.
    pub(crate) fn new(outputs: &'a [usize], d: usize) -> Self {
        let block = partial_block_size(outputs.len(), d);
        let span = PARTIAL_SPAN.max(block).min(d);
        let per_span = span / block;
        let shift = block.trailing_zeros();
        let low_signs = if block == d {
            Vec::new()
        } else {
            outputs.iter().flat_map(|&u| (0..per_span).map(move |w| signed(1.0, u >> shift, w))).collect()
        };
        Self {
            outputs,
            block,
            span,
            span_shift: shift + per_span.trailing_zeros(),
            low_signs,
            tmp: vec![0.0; span],
        }
    }

    /// Writes the unnormalized transform of `x` at the outputs to `out`.
    pub(crate) fn run(&mut self, x: &[f64], out: &mut [f64]) {
        let (block, span) = (self.block, self.span);
        if span == x.len() && block == span {
            self.tmp.copy_from_slice(x);
            butterfly_in_place(&mut self.tmp);
            for (o, &u) in out.iter_mut().zip(self.outputs) {
                *o = self.tmp[u];
            }
            return;
        }
        let mask = block - 1;
        let per_span = span / block;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (s_idx, chunk) in x.chunks_exact(span).enumerate() {
            self.tmp.copy_from_slice(chunk);
            butterfly_levels(&mut self.tmp, 1, block);
            for ((o, &u), signs) in out.iter_mut().zip(self.outputs).zip(self.low_signs.chunks_exact(per_span)) {
                let column = self.tmp[u & mask..].iter().step_by(block);
                let acc: f64 = signs.iter().zip(column).map(|(s, v)| s * v).sum();
                *o += signed(acc, u >> self.span_shift, s_idx);
            }
        }
    }
}

//! Desk-scale version of the encoding argument behind the dimension lower
//! bound for embeddings into an arbitrary target norm.
//!
//! A hard family is the point set `{0, e_1, …, e_d, y_{S_1}, …, y_{S_d}}`
//! with `y_S = s^{-1/2} Σ_{j∈S} e_j` and `s = ⌊1/(128ε²)⌋`. Distances
//! `‖e_j − y_S‖₂` take one of two values depending on whether `j ∈ S`, and the
//! gap survives any `(1 ± ε)` embedding followed by rounding to an ε-cover.
//! Rounded images therefore determine every subset, which makes the
//! concatenated cover indices an injective code for the family.
//!
//! Covers are implicit cubic lattices, so nothing of size `|N|` is stored.

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::embed::lp_norm;
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, stream_rng};

/// Norm on the target space used for both the cover and decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetNorm {
    /// `ℓ₂`; cover cells are cubes of half-width `ε/√k`.
    Euclidean,
    /// `ℓ_∞`; cover cells are cubes of half-width `ε`.
    Max,
}

impl TargetNorm {
    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            TargetNorm::Euclidean => lp_norm(v, 2.0),
            TargetNorm::Max => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Per-coordinate rounding radius giving an ε-cover in this norm.
    fn cell_radius(&self, eps: f64, k: usize) -> f64 {
        match self {
            TargetNorm::Euclidean => eps / (k as f64).sqrt(),
            TargetNorm::Max => eps,
        }
    }
}

/// `⌊1/(128ε²)⌋`, which must be at least one.
pub fn subset_size(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let s = (1.0 / (128.0 * eps * eps)).floor() as usize;
    if s == 0 {
        return Err(Error::EpsTooLarge { eps });
    }
    Ok(s)
}

/// A member of the hard point family: `d` subsets of size `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardFamily {
    d: usize,
    s: usize,
    subsets: Vec<Vec<usize>>,
}

impl HardFamily {
    /// Draws `d` uniformly random `s`-subsets of `0..d`.
    pub fn build(d: usize, eps: f64, seed: u64) -> Result<Self> {
        let s = subset_size(eps)?;
        if s > d {
            return Err(Error::InvalidParameter(format!("subset size {s} exceeds dimension {d}")));
        }
        let mut rng = stream_rng(seed, 0);
        let subsets = (0..d)
            .map(|_| {
                let mut set = sample(&mut rng, d, s).into_vec();
                set.sort_unstable();
                set
            })
            .collect();
        Ok(Self { d, s, subsets })
    }

    /// Family with explicit subsets; each must have `s` distinct indices below `d`.
    pub fn from_subsets(d: usize, eps: f64, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let s = subset_size(eps)?;
        if subsets.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: subsets.len() });
        }
        let subsets = subsets
            .into_iter()
            .map(|mut set| {
                set.sort_unstable();
                set.dedup();
                if set.len() != s || set.last().is_some_and(|&j| j >= d) {
                    return Err(Error::InvalidParameter(format!("subset {set:?} is not an {s}-subset of 0..{d}")));
                }
                Ok(set)
            })
            .collect::<Result<_>>()?;
        Ok(Self { d, s, subsets })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn subset_size(&self) -> usize {
        self.s
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Number of points, `2d + 1`.
    pub fn point_count(&self) -> usize {
        2 * self.d + 1
    }

    pub fn y(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        let w = (self.s as f64).sqrt().recip();
        for &j in &self.subsets[i] {
            v[j] = w;
        }
        v
    }

    /// `[0, e_1, …, e_d, y_{S_1}, …, y_{S_d}]`.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.point_count());
        out.push(vec![0.0; self.d]);
        for j in 0..self.d {
            let mut e = vec![0.0; self.d];
            e[j] = 1.0;
            out.push(e);
        }
        out.extend((0..self.d).map(|i| self.y(i)));
        out
    }

    /// Images `f(e_j) − f(0)` then `f(y_{S_i}) − f(0)`, `2d` vectors in all.
    pub fn images<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Vec<Vec<f64>> {
        let points = self.points();
        let origin = f(&points[0]);
        points[1..]
            .iter()
            .map(|x| f(x).iter().zip(&origin).map(|(a, b)| a - b).collect())
            .collect()
    }
}

/// Distance intervals for members and non-members after embedding and
/// rounding, and the separating threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Separation {
    pub s: usize,
    pub eps: f64,
    pub d_in: f64,
    pub d_out: f64,
    pub inner: (f64, f64),
    pub outer: (f64, f64),
    pub tau: f64,
    pub gap: f64,
    /// `d_out − d_in ≥ 8ε`.
    pub sufficient: bool,
}

/// Intervals `[(1−ε)d − 2ε, (1+ε)d + 2ε]` for `d ∈ {d_in, d_out}`.
pub fn separation_intervals(s: usize, eps: f64) -> Result<Separation> {
    if s == 0 {
        return Err(Error::InvalidParameter("subset size must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let d_in = (2.0 - 2.0 / (s as f64).sqrt()).max(0.0).sqrt();
    let d_out = 2f64.sqrt();
    let inner = ((1.0 - eps) * d_in - 2.0 * eps, (1.0 + eps) * d_in + 2.0 * eps);
    let outer = ((1.0 - eps) * d_out - 2.0 * eps, (1.0 + eps) * d_out + 2.0 * eps);
    if inner.1 >= outer.0 {
        return Err(Error::IntervalsOverlap { inner_hi: inner.1, outer_lo: outer.0 });
    }
    Ok(Separation {
        s,
        eps,
        d_in,
        d_out,
        inner,
        outer,
        tau: 0.5 * (inner.1 + outer.0),
        gap: outer.0 - inner.1,
        sufficient: d_out - d_in >= 8.0 * eps,
    })
}

/// Rounds each coordinate to the nearest multiple of `2·eps`, ties toward
/// `−∞`. Returns the rounded point and its integer lattice coordinates.
pub fn cover_round(point: &[f64], eps: f64) -> (Vec<f64>, Vec<i64>) {
    let spacing = 2.0 * eps;
    let lattice: Vec<i64> = point.iter().map(|v| round_half_down(v / spacing)).collect();
    (lattice.iter().map(|&m| m as f64 * spacing).collect(), lattice)
}

#[inline]
fn round_half_down(v: f64) -> i64 {
    (v - 0.5).ceil() as i64
}

/// A rounded representative and its position in the cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverPoint {
    pub lattice: Vec<i64>,
    /// True when a coordinate left the covered box and was clamped.
    pub clamped: bool,
}

/// ε-cover of the radius-2 ball by an implicit cubic lattice restricted to
/// the bounding box `[−(2+ε), 2+ε]^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverCode {
    pub k: usize,
    pub eps: f64,
    pub norm: TargetNorm,
    pub spacing: f64,
    /// Largest absolute lattice coordinate.
    pub max_index: i64,
    /// `⌈log₂|N|⌉` with `|N| = (2·max_index + 1)^k`.
    pub bits_per_point: usize,
    /// `k·log₂(6/ε)`, the volumetric estimate of `log₂|N|`.
    pub volumetric_bits: f64,
}

impl CoverCode {
    pub fn new(k: usize, eps: f64, norm: TargetNorm) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        let spacing = 2.0 * norm.cell_radius(eps, k);
        let max_index = round_half_down((2.0 + eps) / spacing);
        let radix = BigUint::from((2 * max_index + 1) as u64);
        let size = radix.pow(k as u32);
        let bits_per_point = (size - 1u32).bits() as usize;
        Ok(Self {
            k,
            eps,
            norm,
            spacing,
            max_index,
            bits_per_point,
            volumetric_bits: k as f64 * (6.0 / eps).log2(),
        })
    }

    /// `L = 2d·L₀`.
    pub fn total_bits(&self, d: usize) -> usize {
        2 * d * self.bits_per_point
    }

    pub fn round(&self, point: &[f64]) -> CoverPoint {
        let mut clamped = false;
        let lattice = point
            .iter()
            .map(|v| {
                let m = round_half_down(v / self.spacing);
                if m.abs() > self.max_index {
                    clamped = true;
                }
                m.clamp(-self.max_index, self.max_index)
            })
            .collect();
        CoverPoint { lattice, clamped }
    }

    pub fn coordinates(&self, lattice: &[i64]) -> Vec<f64> {
        lattice.iter().map(|&m| m as f64 * self.spacing).collect()
    }

    /// Mixed-radix index of a lattice point, coordinate 0 least significant.
    pub fn index(&self, lattice: &[i64]) -> BigUint {
        let radix = (2 * self.max_index + 1) as u64;
        lattice.iter().rev().fold(BigUint::from(0u32), |acc, &m| acc * radix + (m + self.max_index) as u64)
    }

    pub fn lattice_of(&self, index: &BigUint) -> Result<Vec<i64>> {
        let radix = BigUint::from((2 * self.max_index + 1) as u64);
        let mut rest = index.clone();
        let mut out = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            let digit = &rest % &radix;
            rest /= &radix;
            let digit = digit.to_u64_digits().first().copied().unwrap_or(0) as i64;
            out.push(digit - self.max_index);
        }
        if rest != BigUint::from(0u32) {
            return Err(Error::Format("cover index out of range".into()));
        }
        Ok(out)
    }

    fn push_bits(&self, index: &BigUint, out: &mut Vec<bool>) {
        out.extend((0..self.bits_per_point as u64).map(|b| index.bit(b)));
    }

    fn read_bits(&self, bits: &[bool]) -> BigUint {
        let mut v = BigUint::from(0u32);
        for (b, &set) in bits.iter().enumerate() {
            if set {
                v.set_bit(b as u64, true);
            }
        }
        v
    }
}

/// Concatenated cover indices of `2d` images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub bits: Vec<bool>,
    /// Count of images that fell outside the covered box.
    pub clamped: usize,
}

/// Encodes rounded images `f(e_1..e_d), f(y_{S_1}..y_{S_d})` (with `f(0) = 0`).
pub fn encode(family: &HardFamily, images: &[Vec<f64>], cover: &CoverCode) -> Result<Encoding> {
    let d = family.dim();
    if images.len() != 2 * d {
        return Err(Error::DimensionMismatch { expected: 2 * d, got: images.len() });
    }
    let mut bits = Vec::with_capacity(cover.total_bits(d));
    let mut clamped = 0;
    for img in images {
        if img.len() != cover.k {
            return Err(Error::DimensionMismatch { expected: cover.k, got: img.len() });
        }
        let point = cover.round(img);
        clamped += point.clamped as usize;
        cover.push_bits(&cover.index(&point.lattice), &mut bits);
    }
    Ok(Encoding { bits, clamped })
}

/// Recovers every subset from an encoding by thresholding representative
/// distances at `τ`. Distances inside the forbidden gap are reported as
/// [`Error::GapViolation`].
pub fn decode_subsets(bits: &[bool], d: usize, s: usize, cover: &CoverCode) -> Result<Vec<Vec<usize>>> {
    if bits.len() != cover.total_bits(d) {
        return Err(Error::DimensionMismatch { expected: cover.total_bits(d), got: bits.len() });
    }
    let sep = separation_intervals(s, cover.eps)?;
    let reps: Vec<Vec<f64>> = bits
        .chunks_exact(cover.bits_per_point)
        .map(|chunk| Ok(cover.coordinates(&cover.lattice_of(&cover.read_bits(chunk))?)))
        .collect::<Result<_>>()?;
    let (basis, sets) = reps.split_at(d);
    sets.iter()
        .enumerate()
        .map(|(i, zs)| {
            let mut members = Vec::with_capacity(s);
            for (j, zj) in basis.iter().enumerate() {
                let diff: Vec<f64> = zj.iter().zip(zs).map(|(a, b)| a - b).collect();
                let distance = cover.norm.norm(&diff);
                if distance > sep.inner.1 && distance < sep.outer.0 {
                    return Err(Error::GapViolation { set: i, index: j, distance });
                }
                if distance <= sep.tau {
                    members.push(j);
                }
            }
            if members.len() != s {
                return Err(Error::InvalidParameter(format!(
                    "decoded subset {i} has {} members, expected {s}",
                    members.len()
                )));
            }
            Ok(members)
        })
        .collect()
}

/// Scale `ln(ε²n) / (ε² ln(1/ε))` of the dimension lower bound.
pub fn lower_bound_scale(n: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let e2n = eps * eps * n;
    if !(e2n > 1.0) {
        return Err(Error::InvalidParameter(format!("eps^2 n = {e2n} must exceed 1")));
    }
    Ok(e2n.ln() / (eps * eps * (1.0 / eps).ln()))
}

/// Random `k × k` orthogonal matrix (row-major) by Gram–Schmidt on a
/// Gaussian matrix.
pub fn random_orthogonal(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let n = lp_norm(&v, 2.0);
        if n > 1e-8 {
            cols.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    let mut out = vec![0.0; k * k];
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            out[i * k + j] = *v;
        }
    }
    out
}

/// Test maps for encode/decode roundtrips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundtripMap {
    /// `x ↦ x` padded with zeros to `k` coordinates.
    Identity,
    /// The first `d` columns of a random `k × k` orthogonal matrix.
    RandomOrthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundtripSummary {
    pub map: RoundtripMap,
    pub families: usize,
    pub exact: usize,
    pub gap_violations: usize,
    pub bits: usize,
}

/// Encodes and decodes `families` random families through `map` in `ℝ^k`.
pub fn roundtrip_trials(
    d: usize,
    k: usize,
    eps: f64,
    families: usize,
    seed: u64,
    map: RoundtripMap,
    norm: TargetNorm,
) -> Result<RoundtripSummary> {
    if k < d {
        return Err(Error::InvalidParameter(format!("isometric test maps need k >= d, got k = {k}, d = {d}")));
    }
    let cover = CoverCode::new(k, eps, norm)?;
    let mut exact = 0;
    let mut gap_violations = 0;
    for f in 0..families as u64 {
        let family = HardFamily::build(d, eps, derive_seed(seed, 2 * f))?;
        let q = random_orthogonal(k, derive_seed(seed, 2 * f + 1));
        let apply = |x: &[f64]| -> Vec<f64> {
            match map {
                RoundtripMap::Identity => {
                    let mut y = x.to_vec();
                    y.resize(k, 0.0);
                    y
                }
                RoundtripMap::RandomOrthogonal => {
                    q.chunks_exact(k).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
                }
            }
        };
        let images = family.images(apply);
        let enc = encode(&family, &images, &cover)?;
        match decode_subsets(&enc.bits, d, family.subset_size(), &cover) {
            Ok(sets) if sets == family.subsets() => exact += 1,
            Err(Error::GapViolation { .. }) => gap_violations += 1,
            _ => {}
        }
    }
    Ok(RoundtripSummary { map, families, exact, gap_violations, bits: cover.total_bits(d) })
}

/// One row of the lower-bound table for `n = 2d + 1` points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundRow {
    pub n: usize,
    pub eps: f64,
    pub s: usize,
    pub d_in: f64,
    pub d_out: f64,
    pub gap: f64,
    pub tau: f64,
    pub k: usize,
    pub bits_per_point: usize,
    pub total_bits: usize,
    pub volumetric_bits_per_point: f64,
    pub lower_bound_scale: Option<f64>,
}

pub fn table_row(n: usize, eps: f64, k: usize, norm: TargetNorm) -> Result<LowerBoundRow> {
    let s = subset_size(eps)?;
    let sep = separation_intervals(s, eps)?;
    let cover = CoverCode::new(k, eps, norm)?;
    let d = n.saturating_sub(1) / 2;
    Ok(LowerBoundRow {
        n,
        eps,
        s,
        d_in: sep.d_in,
        d_out: sep.d_out,
        gap: sep.gap,
        tau: sep.tau,
        k,
        bits_per_point: cover.bits_per_point,
        total_bits: cover.total_bits(d),
        volumetric_bits_per_point: cover.volumetric_bits,
        lower_bound_scale: lower_bound_scale(n as f64, eps).ok(),
    })
}

use rayon::prelude::*;

use super::stats::median;
use super::VerificationReport;
use crate::embed::{lp_norm, required_k_union, GaussianBaseline, Transform};
use crate::error::{Error, Result};
use crate::seeds::derive_seed;

/// Accepted ratio between structured and Gaussian median distortion.
pub const DEFAULT_GAUSSIAN_RATIO: f64 = 1.3;

const GAUSSIAN_SEED_TAG: u64 = 0x6469_7374_6f72_7421;

/// A map whose images are measured in `ℓ_p`.
pub trait Embedding: Sync {
    fn embed(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn exponent(&self) -> f64;
}

impl Embedding for Transform {
    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(x)
    }

    fn exponent(&self) -> f64 {
        self.p()
    }
}

impl Embedding for GaussianBaseline {
    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(x)
    }

    fn exponent(&self) -> f64 {
        self.p()
    }
}

/// The identity measured in `ℓ₂`: zero distortion.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactIsometry;

impl Embedding for ExactIsometry {
    fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(x.to_vec())
    }

    fn exponent(&self) -> f64 {
        2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionStats {
    /// `max |‖f(x) − f(y)‖_p / ‖x − y‖₂ − 1|` over distinct pairs.
    pub max: f64,
    /// Number of distinct pairs, i.e. the size of the normalized difference set.
    pub pairs: usize,
    /// Pairs skipped because the points coincide.
    pub skipped: usize,
}

/// Maximum pairwise distortion of `f` over `points`.
///
/// By linearity `‖f(x) − f(y)‖_p / ‖x − y‖₂ = ‖f((x − y)/‖x − y‖₂)‖_p`, so the
/// normalized difference set is evaluated through the images of the points.
pub fn max_distortion<E: Embedding + ?Sized>(f: &E, points: &[Vec<f64>]) -> Result<DistortionStats> {
    let p = f.exponent();
    let images: Vec<Vec<f64>> = points.par_iter().map(|x| f.embed(x)).collect::<Result<_>>()?;
    let mut max = 0.0f64;
    let (mut pairs, mut skipped) = (0usize, 0usize);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
            let source = lp_norm(&dx, 2.0);
            if source == 0.0 {
                skipped += 1;
                continue;
            }
            let dy: Vec<f64> = images[i].iter().zip(&images[j]).map(|(a, b)| a - b).collect();
            max = max.max((lp_norm(&dy, p) / source - 1.0).abs());
            pairs += 1;
        }
    }
    Ok(DistortionStats { max, pairs, skipped })
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("at least two points are required".into()));
    }
    let d = points[0].len();
    if let Some(bad) = points.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
    }
    if points.iter().all(|x| x == &points[0]) {
        return Err(Error::InvalidParameter("all points are identical".into()));
    }
    Ok(d)
}

/// Plans `Ψ` for the point set and reports its maximum pairwise distortion.
///
/// The dimension sufficient for failure probability `rho` is always reported;
/// `k` overrides it (a smaller `k` is flagged in the report).
pub fn distortion_suite(
    points: &[Vec<f64>],
    p: f64,
    eps: f64,
    rho: f64,
    k: Option<usize>,
    seed: u64,
) -> Result<VerificationReport> {
    let d = check_points(points)?;
    let n = points.len();
    let required = required_k_union(n, eps, rho)?;
    let k = k.unwrap_or(required);
    let t = Transform::plan(d, k, p, seed, false)?;
    let stats = max_distortion(&t, points)?;
    let mut r = VerificationReport::new("distortion")
        .param("n", n)
        .param("d", d)
        .param("k", k)
        .param("p", p)
        .param("eps", eps)
        .param("rho", rho)
        .param("required_k", required)
        .param("pairs", stats.pairs)
        .param("skipped_pairs", stats.skipped)
        .param("relaxed", t.is_relaxed())
        .exact(stats.max);
    if k < required {
        r = r.note(format!("k = {k} is below the sufficient dimension {required}"));
    }
    r.bound = eps;
    r.trials = stats.pairs as u64;
    r.seed = Some(seed);
    r.pass = stats.max <= eps;
    Ok(r)
}

/// Median maximum distortion of `Ψ` against the dense Gaussian embedding,
/// each over `seeds` independent draws. Passes when the ratio of medians
/// lies within `[1/ratio, ratio]`.
pub fn distortion_vs_gaussian(
    points: &[Vec<f64>],
    k: usize,
    p: f64,
    seeds: usize,
    master_seed: u64,
    ratio: f64,
) -> Result<VerificationReport> {
    let d = check_points(points)?;
    if seeds == 0 {
        return Err(Error::InvalidParameter("at least one seed is required".into()));
    }
    let base = Transform::plan(d, k, p, master_seed, false)?;
    let structured: Vec<f64> = (0..seeds as u64)
        .map(|s| Ok(max_distortion(&base.reseeded(derive_seed(master_seed, s)), points)?.max))
        .collect::<Result<_>>()?;
    let gaussian: Vec<f64> = (0..seeds as u64)
        .map(|s| {
            let g = GaussianBaseline::new(d, k, p, derive_seed(master_seed ^ GAUSSIAN_SEED_TAG, s))?;
            Ok(max_distortion(&g, points)?.max)
        })
        .collect::<Result<_>>()?;
    let (ms, mg) = (median(&structured), median(&gaussian));
    let observed = ms / mg;
    let mut r = VerificationReport::new("distortion_vs_gaussian")
        .param("n", points.len())
        .param("d", d)
        .param("k", k)
        .param("p", p)
        .param("seeds", seeds)
        .param("median_structured", ms)
        .param("median_gaussian", mg)
        .param("relaxed", base.is_relaxed())
        .exact(observed);
    r.ci = [observed, observed];
    r.bound = ratio;
    r.trials = seeds as u64;
    r.seed = Some(master_seed);
    r.pass = observed <= ratio && observed >= ratio.recip();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn isometry_has_zero_distortion() {
        let s = max_distortion(&ExactIsometry, &points(10, 50, 1)).unwrap();
        assert!(s.max < 1e-12);
        assert_eq!(s.pairs, 45);
    }

    #[test]
    fn identical_points_are_skipped() {
        let mut xs = points(2, 64, 2);
        xs.insert(1, xs[0].clone());
        let r = distortion_suite(&xs, 1.0, 0.5, 0.1, Some(2), 3).unwrap();
        assert_eq!(r.params["skipped_pairs"], 1);
        assert_eq!(r.params["pairs"], 2);
        assert_eq!(r.notes.len(), 1);
        let same = vec![xs[0].clone(), xs[0].clone()];
        assert!(distortion_suite(&same, 1.0, 0.5, 0.1, Some(2), 3).is_err());
        assert!(distortion_suite(&xs[..1], 1.0, 0.5, 0.1, Some(2), 3).is_err());
    }

    #[test]
    fn reports_required_dimension() {
        let xs = points(10, 64, 4);
        let r = distortion_suite(&xs, 1.0, 0.5, 0.01, Some(4), 3).unwrap();
        assert_eq!(r.params["required_k"], (864.0 * 60000f64.ln()).ceil() as u64);
    }
}

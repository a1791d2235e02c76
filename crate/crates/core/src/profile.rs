//! Wall-clock timing of the pipeline stages over a grid of dimensions.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embed::Transform;
use crate::error::{Error, Result};
use crate::verify::stats::{fit_through_origin, median, ols_slope};
use crate::wht;

/// Largest `k·d` for which the explicit multiply is timed.
pub const DEFAULT_EXPLICIT_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileConfig {
    pub dims: Vec<usize>,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub repeats: usize,
    pub explicit_budget: usize,
}

impl ProfileConfig {
    pub fn new(dims: Vec<usize>, k: usize) -> Self {
        Self { dims, k, p: 1.0, seed: 0, repeats: 5, explicit_budget: DEFAULT_EXPLICIT_BUDGET }
    }
}

/// Seconds per call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub min: f64,
    pub median: f64,
}

fn time<F: FnMut()>(repeats: usize, mut f: F) -> Timing {
    f();
    let mut samples: Vec<f64> = (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    Timing { min: samples[0], median: median(&samples) }
}

/// Stage times at one dimension. `diagonals` and `hadamard` cover all three
/// sign flips and both transforms respectively.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRow {
    pub d: usize,
    pub k: usize,
    pub diagonals: Timing,
    pub hadamard: Timing,
    pub a_fast: Timing,
    pub a_explicit: Option<Timing>,
    pub pipeline: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageExponents {
    pub diagonals: f64,
    pub hadamard: f64,
    pub a_fast: f64,
    pub pipeline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub k: usize,
    pub p: f64,
    pub repeats: usize,
    pub threads: usize,
    pub rows: Vec<StageRow>,
    /// Log-log slopes of minimum time against `d`.
    pub exponents: Option<StageExponents>,
    /// A-fast growth per doubling of `d` between consecutive grid points.
    pub a_fast_per_doubling: Vec<f64>,
    /// Fit `pipeline ≈ c·d·log₂d`.
    pub pipeline_c: Option<f64>,
    pub pipeline_r2: Option<f64>,
    /// Explicit over fast multiply time, per row where both were timed.
    pub explicit_speedup: Vec<(usize, f64)>,
}

impl ProfileReport {
    pub fn max_per_doubling(&self) -> Option<f64> {
        self.a_fast_per_doubling.iter().copied().reduce(f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn profile_row(d: usize, k: usize, p: f64, seed: u64, repeats: usize, explicit_budget: usize) -> Result<StageRow> {
    let t = Transform::plan(d, k, p, seed, false)?;
    let dp = t.padded_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut buf = vec![0.0; dp];
    buf[..d].copy_from_slice(&x);
    let [d1, d2, d3] = t.diagonals();

    let diagonals = time(repeats, || {
        d3.apply(&mut buf);
        d2.apply(&mut buf);
        d1.apply(&mut buf);
    });
    let hadamard = time(repeats, || {
        wht::wht_in_place(&mut buf);
        wht::wht_in_place(&mut buf);
    });
    let pre = t.precondition(&x)?;
    let a = t.matrix();
    let mut sink = 0.0;
    let a_fast = time(repeats, || sink += a.multiply_fast(&pre).expect("length matches")[0]);
    let a_explicit = (k.saturating_mul(dp) <= explicit_budget)
        .then(|| time(repeats, || sink += a.multiply_explicit(&pre).expect("length matches")[0]));
    let pipeline = time(repeats, || sink += t.apply(&x).expect("valid input")[0]);
    std::hint::black_box(sink);
    Ok(StageRow { d: dp, k, diagonals, hadamard, a_fast, a_explicit, pipeline })
}

pub fn profile(config: &ProfileConfig) -> Result<ProfileReport> {
    if config.dims.is_empty() {
        return Err(Error::InvalidParameter("empty dimension grid".into()));
    }
    let rows = config
        .dims
        .iter()
        .map(|&d| profile_row(d, config.k, config.p, config.seed, config.repeats, config.explicit_budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(config, rows))
}

fn summarize(config: &ProfileConfig, rows: Vec<StageRow>) -> ProfileReport {
    let log_d: Vec<f64> = rows.iter().map(|r| (r.d as f64).ln()).collect();
    let slope = |f: &dyn Fn(&StageRow) -> f64| {
        let y: Vec<f64> = rows.iter().map(|r| f(r).ln()).collect();
        ols_slope(&log_d, &y)
    };
    let exponents = (rows.len() >= 2).then(|| StageExponents {
        diagonals: slope(&|r| r.diagonals.min),
        hadamard: slope(&|r| r.hadamard.min),
        a_fast: slope(&|r| r.a_fast.min),
        pipeline: slope(&|r| r.pipeline.min),
    });
    let a_fast_per_doubling = rows
        .windows(2)
        .filter(|w| w[1].d > w[0].d)
        .map(|w| {
            let doublings = (w[1].d as f64 / w[0].d as f64).log2();
            (w[1].a_fast.min / w[0].a_fast.min).powf(1.0 / doublings)
        })
        .collect();
    let (pipeline_c, pipeline_r2) = if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| r.d as f64 * (r.d as f64).log2()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.pipeline.min).collect();
        let (c, r2) = fit_through_origin(&x, &y);
        (Some(c), Some(r2))
    } else {
        (None, None)
    };
    let explicit_speedup =
        rows.iter().filter_map(|r| r.a_explicit.map(|e| (r.d, e.min / r.a_fast.min))).collect();
    ProfileReport {
        k: config.k,
        p: config.p,
        repeats: config.repeats,
        threads: rayon::current_num_threads(),
        rows,
        exponents,
        a_fast_per_doubling,
        pipeline_c,
        pipeline_r2,
        explicit_speedup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_runs() {
        let mut cfg = ProfileConfig::new(vec![256, 1024, 4096], 4);
        cfg.repeats = 2;
        let report = profile(&cfg).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.a_fast_per_doubling.len(), 2);
        assert!(report.pipeline_r2.is_some());
        assert_eq!(report.explicit_speedup.len(), 3);
        assert!(report.rows.iter().all(|r| r.pipeline.min > 0.0 && r.pipeline.min <= r.pipeline.median));
        assert!(report.to_json().contains("a_fast_per_doubling"));
    }

    #[test]
    fn explicit_budget_respected() {
        let row = profile_row(1024, 4, 1.0, 0, 1, 1000).unwrap();
        assert!(row.a_explicit.is_none());
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(profile(&ProfileConfig::new(vec![], 4)).is_err());
    }
}

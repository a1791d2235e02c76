//! Statistical and exact checks of the embedding's quantitative guarantees.
//!
//! Monte-Carlo checks draw one independent seed per trial with
//! [`crate::seeds::derive_seed`] and aggregate in trial order, so every
//! report is reproducible from its seed regardless of thread count.

mod distortion;
mod flatness;
mod moment;
mod opnorm;
mod report;
pub mod stats;
mod tail;

pub use distortion::{
    distortion_suite, distortion_vs_gaussian, max_distortion, DistortionStats, Embedding, ExactIsometry,
    DEFAULT_GAUSSIAN_RATIO,
};
pub use flatness::{l4_flatness_check, MIN_FLATNESS_TRIALS};
pub use moment::{moment_check, moment_error, MAX_ENUMERATION_DIM};
pub use opnorm::{
    opnorm_2to2, opnorm_2to4_lower, opnorm_check, ColumnScaledMatrix, OpNormEstimate, DEFAULT_POWER_TOL,
};
pub use report::VerificationReport;
pub use tail::{
    compare_gaussian, gaussian_norm_samples, structured_norm_samples, tail_bound, tail_estimate, tail_from_samples,
    tail_profile, GaussianSampling, DEFAULT_KS_THRESHOLD, MIN_TAIL_TRIALS,
};

use crate::error::{Error, Result};

/// Tolerance on `‖x‖₂ = 1` for checks that require unit inputs.
pub const UNIT_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_unit(x: &[f64]) -> Result<()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnit(norm));
    }
    Ok(())
}

/// The unit vector `d^{-1/2}·(1, …, 1)`.
pub fn flat_unit(d: usize) -> Vec<f64> {
    vec![(d as f64).sqrt().recip(); d]
}

/// The standard basis vector `e_{index}` of length `d`.
pub fn basis_vector(d: usize, index: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[index] = 1.0;
    e
}

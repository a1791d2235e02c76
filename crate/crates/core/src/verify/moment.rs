use super::stats::compensated_sum;
use super::{basis_vector, check_unit, flat_unit, VerificationReport};
use crate::embed::MomentConstants;
use crate::error::{Error, Result};

/// Largest dimension enumerated exactly (2^20 sign vectors).
pub const MAX_ENUMERATION_DIM: usize = 20;

/// Exact `E|Y|^p` for `Y = Σ_j a_j ξ_j x_j` over all Rademacher `ξ`.
///
/// The sum is split into two halves whose partial sums are tabulated
/// separately, so each `Y` is formed by one addition of two short sums.
fn exact_abs_moment(x: &[f64], signs: &[f64], p: f64) -> f64 {
    let d = x.len();
    if d == 0 {
        return 0.0;
    }
    let w: Vec<f64> = x.iter().zip(signs).map(|(a, b)| a * b).collect();
    // ξ and −ξ give the same |Y|: pin ξ_0 = +1.
    let (head, rest) = w.split_at(1);
    let half = rest.len() / 2;
    let partial_sums = |coords: &[f64]| -> Vec<f64> {
        (0..1usize << coords.len())
            .map(|mask| {
                coords
                    .iter()
                    .enumerate()
                    .map(|(j, c)| if mask >> j & 1 == 1 { -c } else { *c })
                    .sum()
            })
            .collect()
    };
    let lo = partial_sums(&rest[..half]);
    let hi = partial_sums(&rest[half..]);
    let per_hi: Vec<f64> = hi
        .iter()
        .map(|h| {
            let terms: Vec<f64> = lo.iter().map(|l| (head[0] + l + h).abs().powf(p)).collect();
            compensated_sum(&terms)
        })
        .collect();
    compensated_sum(&per_hi) / (lo.len() * hi.len()) as f64
}

/// Exact `|E|Y|^p − β_p^p|` for unit `x` and sign row `a_row`.
pub fn moment_error(x: &[f64], a_row: &[f64], constants: &MomentConstants) -> Result<f64> {
    if x.len() > MAX_ENUMERATION_DIM {
        return Err(Error::BudgetExceeded { needed: 1 << x.len(), budget: 1 << MAX_ENUMERATION_DIM });
    }
    if a_row.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: a_row.len() });
    }
    if a_row.iter().any(|s| s.abs() != 1.0) {
        return Err(Error::InvalidParameter("sign row entries must be ±1".into()));
    }
    check_unit(x)?;
    Ok((exact_abs_moment(x, a_row, constants.p) - constants.gaussian_moment()).abs())
}

/// Exact moment check against `5·C₀·‖x‖₃³`, with the flat-versus-spiky
/// diagnostic at the same dimension.
pub fn moment_check(x: &[f64], a_row: &[f64], constants: &MomentConstants) -> Result<VerificationReport> {
    let d = x.len();
    let error = moment_error(x, a_row, constants)?;
    let l3_cubed: f64 = x.iter().map(|v| v.abs().powi(3)).sum();
    let bound = 5.0 * constants.c0 * l3_cubed;
    let ones = vec![1.0; d];
    let flat_error = moment_error(&flat_unit(d), &ones, constants)?;
    let spike_error = moment_error(&basis_vector(d, 0), &ones, constants)?;
    let p = constants.p;
    let mut r = VerificationReport::new("moment")
        .param("d", d)
        .param("p", p)
        .param("c0", constants.c0)
        .param("beta_p", constants.beta_p)
        .param("l3_cubed", l3_cubed)
        .param("ratio", if l3_cubed > 0.0 { error / l3_cubed } else { 0.0 })
        .param("root_error", error.powf(1.0 / p))
        .param("root_bound", bound.powf(1.0 / p))
        .param("flat_error", flat_error)
        .param("spike_error", spike_error)
        .param("flat_below_spike", flat_error < spike_error)
        .note("C0 is a configurable constant; the ratio error/||x||_3^3 does not depend on it")
        .exact(error);
    r.bound = bound;
    r.trials = 1u64 << d;
    r.pass = error <= bound;
    Ok(r)
}

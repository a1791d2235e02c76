use rayon::prelude::*;

use super::stats::{mean, wilson_interval, Z99};
use super::{check_unit, VerificationReport};
use crate::embed::lp_norm;
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, SignDiagonal};
use crate::wht;

pub const MIN_FLATNESS_TRIALS: u64 = 10_000;

/// Frequency of `‖HDx‖₄ > (3^{1/4} + t)·d^{-1/4}` over random `D`, against
/// `2·exp(−t²/(2‖x‖₄²))`.
pub fn l4_flatness_check(x: &[f64], t: f64, trials: u64, seed: u64) -> Result<VerificationReport> {
    let d = x.len();
    if !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    check_unit(x)?;
    if trials < MIN_FLATNESS_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_FLATNESS_TRIALS} trials required, got {trials}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be non-negative, got {t}")));
    }
    let quarter = (d as f64).powf(-0.25);
    let threshold = (3f64.powf(0.25) + t) * quarter;
    let norms: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let diag = SignDiagonal::generate(derive_seed(seed, i), 0, d);
            let mut buf = x.to_vec();
            diag.apply(&mut buf);
            wht::wht_in_place(&mut buf);
            lp_norm(&buf, 4.0)
        })
        .collect();
    let exceed = norms.iter().filter(|&&n| n > threshold).count() as u64;
    let x4 = lp_norm(x, 4.0);
    let bound = 2.0 * (-t * t / (2.0 * x4 * x4)).exp();
    let (lo, hi) = wilson_interval(exceed, trials, Z99);
    let mut r = VerificationReport::new("flatness")
        .param("d", d)
        .param("t", t)
        .param("threshold", threshold)
        .param("x_l4", x4)
        .param("mean_scaled_l4", mean(&norms) / quarter)
        .param("max_scaled_l4", norms.iter().cloned().fold(0.0, f64::max) / quarter);
    r.estimate = exceed as f64 / trials as f64;
    r.ci = [lo, hi];
    r.bound = bound;
    r.trials = trials;
    r.seed = Some(seed);
    r.pass = bound >= 1.0 || hi <= bound;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{basis_vector, flat_unit};

    #[test]
    fn spike_is_flattened_exactly() {
        // H·D·e₁ has every entry ±d^{-1/2}, so ‖HDe₁‖₄ = d^{-1/4} always.
        let r = l4_flatness_check(&basis_vector(256, 0), 1.0, 10_000, 4).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!((r.get_f64("max_scaled_l4").unwrap() - 1.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn zero_t_is_vacuous() {
        let r = l4_flatness_check(&flat_unit(64), 0.0, 10_000, 1).unwrap();
        assert_eq!(r.bound, 2.0);
        assert!(r.pass);
    }

    #[test]
    fn flat_input_never_exceeds() {
        // The bound is 2e^{-16}, far below what 10⁴ trials can resolve, so
        // the check cannot pass; the norms still concentrate near 3^{1/4}.
        let r = l4_flatness_check(&flat_unit(1024), 1.0, 10_000, 2).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(!r.pass);
        assert!((r.get_f64("mean_scaled_l4").unwrap() - 3f64.powf(0.25)).abs() < 0.05);
    }

    #[test]
    fn input_checks() {
        assert!(l4_flatness_check(&flat_unit(6), 1.0, 10_000, 0).is_err());
        assert!(l4_flatness_check(&[1.0, 1.0], 1.0, 10_000, 0).is_err());
        assert!(l4_flatness_check(&flat_unit(8), 1.0, 100, 0).is_err());
    }
}

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Default non-uniform Berry–Esseen constant.
pub const DEFAULT_C0: f64 = 30.84;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::ExponentOutOfRange(p));
    }
    Ok(())
}

/// `β_p = (E|Z|^p)^{1/p}` for a standard Gaussian `Z`, from the closed form
/// `E|Z|^p = 2^{p/2} Γ((p+1)/2) / √π`.
pub fn beta_p(p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok((2.0 / std::f64::consts::PI).sqrt());
    }
    let log_moment =
        0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0)) - 0.5 * std::f64::consts::PI.ln();
    Ok((log_moment / p).exp())
}

/// Constants entering the normalization and the moment bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentConstants {
    pub p: f64,
    pub beta_p: f64,
    pub c0: f64,
}

impl MomentConstants {
    pub fn new(p: f64, c0: f64) -> Result<Self> {
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(Error::InvalidParameter(format!("C0 must be positive, got {c0}")));
        }
        Ok(Self { p, beta_p: beta_p(p)?, c0 })
    }

    /// `β_p^p = E|Z|^p`.
    pub fn gaussian_moment(&self) -> f64 {
        self.beta_p.powf(self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    /// `E|Z|^p` by quadrature; the substitution `t = u²` removes the
    /// non-smooth `t^p` behaviour at the origin.
    fn gaussian_abs_moment_quadrature(p: f64) -> f64 {
        let norm = (2.0 / std::f64::consts::PI).sqrt();
        let g = |u: f64| {
            let t = u * u;
            norm * t.powf(p) * (-0.5 * t * t).exp() * 2.0 * u
        };
        simpson(&g, 0.0, 6.0, 1e-15)
    }

    #[test]
    fn endpoints() {
        assert!((beta_p(1.0).unwrap() - 0.797884560802865).abs() < 1e-12);
        assert!((beta_p(2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_quadrature() {
        for i in 0..=10 {
            let p = 1.0 + i as f64 / 10.0;
            let want = gaussian_abs_moment_quadrature(p).powf(1.0 / p);
            let got = beta_p(p).unwrap();
            assert!((got - want).abs() < 1e-8, "p = {p}: {got} vs {want}");
        }
    }

    #[test]
    fn nondecreasing() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let b = beta_p(1.0 + i as f64 / 100.0).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(beta_p(0.5), Err(Error::ExponentOutOfRange(_))));
        assert!(beta_p(2.5).is_err());
        assert!(beta_p(f64::NAN).is_err());
        assert!(MomentConstants::new(1.5, -1.0).is_err());
    }
}

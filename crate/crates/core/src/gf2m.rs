//! Arithmetic in GF(2^m) with polynomial-basis elements packed into `u32`.
//!
//! Besides multiplication this module precomputes two linear maps used by the
//! sign matrix in [`crate::fourwise`]: the trace mask `τ` with
//! `Tr(a) = parity(a & τ)`, and the trace-form index map `σ` with
//! `Tr(u·v) = parity(u & σ(v))`.

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 32;

/// Largest degree for which `σ` is stored as a full table.
const FORM_TABLE_MAX_DEGREE: u32 = 16;

/// A binary extension field GF(2^m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    degree: u32,
    modulus: u64,
    trace_mask: u32,
    form_basis: Vec<u32>,
    form_table: Option<Vec<u32>>,
}

/// Carry-less product of two polynomials of degree < 32.
#[inline]
fn clmul(a: u32, b: u32) -> u64 {
    let a = a as u64;
    let mut b = b;
    let mut acc = 0u64;
    while b != 0 {
        let low = b.trailing_zeros();
        acc ^= a << low;
        b &= b - 1;
    }
    acc
}

#[inline]
fn poly_degree(a: u64) -> i32 {
    63 - a.leading_zeros() as i32
}

/// `a mod m` over GF(2)[x]; `m` must be nonzero.
fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = poly_degree(m);
    while a != 0 && poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn poly_mulmod(a: u64, b: u64, m: u64) -> u64 {
    poly_rem(clmul(a as u32, b as u32), m)
}

/// `x^(2^times) mod m`.
fn x_pow_two_pow(times: u32, m: u64) -> u64 {
    let mut r = poly_rem(0b10, m);
    for _ in 0..times {
        r = poly_mulmod(r, r, m);
    }
    r
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Irreducibility of a degree-`n` polynomial over GF(2).
///
/// Trial division by every polynomial of degree at most `n/2` for `n ≤ 16`,
/// Rabin's test above that.
pub fn is_irreducible(f: u64) -> bool {
    let n = poly_degree(f);
    if n < 1 {
        return false;
    }
    let n = n as u32;
    if n <= 16 {
        let max_div = 1u64 << (n / 2 + 1);
        return (2..max_div).all(|g| poly_rem(f, g) != 0);
    }
    if x_pow_two_pow(n, f) != poly_rem(0b10, f) {
        return false;
    }
    prime_factors(n).into_iter().all(|q| {
        let h = x_pow_two_pow(n / q, f) ^ poly_rem(0b10, f);
        poly_degree(poly_gcd(f, h)) == 0
    })
}

impl FieldSpec {
    /// Field of degree `m` with the smallest irreducible modulus that has a
    /// nonzero constant term.
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::DegreeOutOfRange(m));
        }
        let lead = 1u64 << m;
        let modulus = (lead + 1..lead << 1)
            .step_by(2)
            .find(|&f| is_irreducible(f))
            .expect("an irreducible polynomial exists in every degree");
        Ok(Self::with_modulus_unchecked(m, modulus))
    }

    /// Field with an explicit modulus, which must be irreducible of degree `m`.
    pub fn with_modulus(m: u32, modulus: u64) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::DegreeOutOfRange(m));
        }
        if poly_degree(modulus) != m as i32 || !is_irreducible(modulus) {
            return Err(Error::InvalidParameter(format!(
                "{modulus:#x} is not an irreducible polynomial of degree {m}"
            )));
        }
        Ok(Self::with_modulus_unchecked(m, modulus))
    }

    fn with_modulus_unchecked(m: u32, modulus: u64) -> Self {
        let mut field = FieldSpec {
            degree: m,
            modulus,
            trace_mask: 0,
            form_basis: Vec::new(),
            form_table: None,
        };
        field.trace_mask = (0..m).fold(0u32, |mask, i| {
            mask | (field.trace_by_definition(1u32 << i) << i)
        });
        field.form_basis = (0..m)
            .map(|j| {
                (0..m).fold(0u32, |acc, i| {
                    acc | (field.trace(field.mul(1u32 << i, 1u32 << j)) << i)
                })
            })
            .collect();
        if m <= FORM_TABLE_MAX_DEGREE {
            let size = 1usize << m;
            let mut table = vec![0u32; size];
            for v in 1..size {
                let low = v.trailing_zeros() as usize;
                table[v] = table[v & (v - 1)] ^ field.form_basis[low];
            }
            field.form_table = Some(table);
        }
        field
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Modulus bits, including the leading `x^m` term.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn trace_mask(&self) -> u32 {
        self.trace_mask
    }

    /// Number of field elements, `2^m`.
    pub fn order(&self) -> u64 {
        1u64 << self.degree
    }

    fn check(&self, a: u64) -> Result<u32> {
        if a >= self.order() {
            return Err(Error::ElementOutOfRange { value: a, degree: self.degree });
        }
        Ok(a as u32)
    }

    /// Product of two elements. Inputs must be in range.
    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!((a as u64) < self.order() && (b as u64) < self.order());
        let mut p = clmul(a, b);
        let m = self.degree;
        for bit in (m..2 * m).rev() {
            if p >> bit & 1 == 1 {
                p ^= self.modulus << (bit - m);
            }
        }
        p as u32
    }

    /// Range-checked [`FieldSpec::mul`].
    pub fn checked_mul(&self, a: u64, b: u64) -> Result<u32> {
        Ok(self.mul(self.check(a)?, self.check(b)?))
    }

    #[inline]
    pub fn cube(&self, a: u32) -> u32 {
        self.mul(self.mul(a, a), a)
    }

    /// Trace via the precomputed mask.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        (a & self.trace_mask).count_ones() & 1
    }

    /// `Σ_{i<m} a^(2^i)` computed by repeated squaring.
    pub fn trace_by_definition(&self, a: u32) -> u32 {
        let mut acc = 0u32;
        let mut power = a;
        for _ in 0..self.degree {
            acc ^= power;
            power = self.mul(power, power);
        }
        debug_assert!(acc <= 1, "trace must land in the prime field");
        acc
    }

    /// The index map `σ` with `Tr(u·v) = parity(u & σ(v))`.
    #[inline]
    pub fn form_map(&self, v: u32) -> u32 {
        match &self.form_table {
            Some(table) => table[v as usize],
            None => {
                let mut v = v;
                let mut acc = 0;
                while v != 0 {
                    acc ^= self.form_basis[v.trailing_zeros() as usize];
                    v &= v - 1;
                }
                acc
            }
        }
    }

    /// Multiplicative inverse by exponentiation (`a^(2^m − 2)`); `None` for 0.
    pub fn inverse(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let mut result = 1u32;
        let mut base = a;
        let mut e = (1u64 << self.degree) - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        Some(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Irreducibility by brute force: no factor of any degree.
    fn irreducible_brute(f: u64) -> bool {
        let n = poly_degree(f);
        (2..f).filter(|&g| poly_degree(g) >= 1 && poly_degree(g) < n).all(|g| poly_rem(f, g) != 0)
    }

    #[test]
    fn smallest_moduli() {
        assert_eq!(FieldSpec::new(1).unwrap().modulus(), 0b11);
        assert_eq!(FieldSpec::new(2).unwrap().modulus(), 0b111);
        assert_eq!(FieldSpec::new(3).unwrap().modulus(), 0b1011);
        // Exhaustive scan for the first few degrees.
        for m in 2..=9u32 {
            let lead = 1u64 << m;
            let want = (lead + 1..lead << 1).step_by(2).find(|&f| irreducible_brute(f)).unwrap();
            assert_eq!(FieldSpec::new(m).unwrap().modulus(), want, "degree {m}");
        }
    }

    #[test]
    fn known_moduli_for_larger_degrees() {
        // x^8+x^4+x^3+x+1
        assert_eq!(FieldSpec::new(8).unwrap().modulus(), 0x11b);
        assert!(is_irreducible(0x11d));
        assert!(!is_irreducible(0b101)); // (x+1)^2
        assert!(!is_irreducible(0b1111)); // (x+1)(x^2+x+1)
    }

    #[test]
    fn rabin_agrees_with_trial_division() {
        // Degree 17..20 polynomials built as products are reducible.
        let a = FieldSpec::new(9).unwrap().modulus();
        let b = FieldSpec::new(10).unwrap().modulus();
        assert!(!is_irreducible(clmul(a as u32, b as u32)));
        for m in [17, 20, 24, 31, 32] {
            let f = FieldSpec::new(m).unwrap();
            assert!(is_irreducible(f.modulus()));
            assert_eq!(poly_degree(f.modulus()), m as i32);
        }
        // Cross-check Rabin against trial division on degree 17 candidates.
        let lead = 1u64 << 17;
        for f in (lead + 1..lead + 400).step_by(2) {
            let trial = (2..1u64 << 9).all(|g| poly_rem(f, g) != 0);
            assert_eq!(is_irreducible(f), trial, "{f:#x}");
        }
    }

    #[test]
    fn degree_range() {
        assert!(matches!(FieldSpec::new(0), Err(Error::DegreeOutOfRange(0))));
        assert!(matches!(FieldSpec::new(33), Err(Error::DegreeOutOfRange(33))));
        assert!(FieldSpec::with_modulus(3, 0b1001).is_err());
        assert!(FieldSpec::with_modulus(3, 0b1101).is_ok());
    }

    #[test]
    fn multiplication_examples() {
        let f = FieldSpec::new(3).unwrap();
        for a in 0..8 {
            assert_eq!(f.mul(a, 0), 0);
            assert_eq!(f.mul(a, 1), a);
        }
        assert_eq!(f.mul(0b010, 0b100), 0b011);
        assert_eq!(f.cube(0), 0);
        assert_eq!(f.cube(1), 1);
        assert_eq!(f.cube(0b010), 0b011);
        assert!(matches!(f.checked_mul(8, 1), Err(Error::ElementOutOfRange { value: 8, degree: 3 })));
        assert_eq!(f.checked_mul(2, 4).unwrap(), 3);
    }

    #[test]
    fn trace_examples() {
        let f1 = FieldSpec::new(1).unwrap();
        assert_eq!((f1.trace(0), f1.trace(1)), (0, 1));
        let f3 = FieldSpec::new(3).unwrap();
        assert_eq!(f3.trace(0), 0);
        assert_eq!(f3.trace(1), 1);
        assert_eq!(FieldSpec::new(2).unwrap().trace(1), 0);
    }

    #[test]
    fn field_axioms_small() {
        for m in 1..=4 {
            let f = FieldSpec::new(m).unwrap();
            let n = 1u32 << m;
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..n {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, b ^ c), f.mul(a, b) ^ f.mul(a, c));
                    }
                }
                if a != 0 {
                    assert!((1..n).any(|b| f.mul(a, b) == 1));
                    assert_eq!(f.mul(a, f.inverse(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn trace_linear_and_frobenius_invariant() {
        for m in 1..=8 {
            let f = FieldSpec::new(m).unwrap();
            let n = 1u32 << m;
            for a in 0..n {
                assert_eq!(f.trace(a), f.trace_by_definition(a));
                assert_eq!(f.trace(f.mul(a, a)), f.trace(a));
                for b in 0..n {
                    assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
                }
            }
        }
    }

    #[test]
    fn trace_mask_matches_definition_large_degree() {
        for m in [13, 20, 32] {
            let f = FieldSpec::new(m).unwrap();
            let mut x = 0x9e37_79b9u32 & ((1u64 << m) - 1) as u32;
            for _ in 0..200 {
                assert_eq!(f.trace(x), f.trace_by_definition(x));
                x = f.mul(x, x) ^ (x >> 1) ^ 1;
            }
        }
    }

    #[test]
    fn form_map_is_bijective_and_correct() {
        for m in 1..=16 {
            let f = FieldSpec::new(m).unwrap();
            let n = 1usize << m;
            let mut seen = vec![false; n];
            for v in 0..n as u32 {
                let s = f.form_map(v) as usize;
                assert!(!seen[s], "degree {m}: σ not injective");
                seen[s] = true;
            }
            if m <= 6 {
                for u in 0..n as u32 {
                    for v in 0..n as u32 {
                        let lhs = f.trace(f.mul(u, v));
                        let rhs = (u & f.form_map(v)).count_ones() & 1;
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn form_map_without_table() {
        let f = FieldSpec::new(20).unwrap();
        assert!(f.form_table.is_none());
        for (u, v) in [(3u32, 5u32), (0xfffff, 0x12345), (1, 0x80000)] {
            let lhs = f.trace(f.mul(u, v));
            let rhs = (u & f.form_map(v)).count_ones() & 1;
            assert_eq!(lhs, rhs);
        }
    }
}

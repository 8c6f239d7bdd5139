//! Exact integer helpers and the scalar abstraction shared by the float and
//! rational code paths.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Binomial coefficient `C(n, k)` in exact arithmetic; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` as `f64`, exact for every value below 2^53.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// Descending Pochhammer symbol `n^(k) = n (n-1) ... (n-k+1)`.
///
/// `n^(0) = 1` for every `n` (including `n = 0`), and `n^(k) = 0` whenever
/// `k > n`.
pub fn pochhammer(n: u64, k: u64) -> BigUint {
    if k == 0 {
        return BigUint::one();
    }
    if k > n {
        return BigUint::zero();
    }
    (n - k + 1..=n).fold(BigUint::one(), |acc, f| acc * f)
}

/// Best rational approximation `num/den` with `den <= max_den`, returned
/// only when it lies within `tol` of `x`.
pub fn approximate_rational(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let mut best: Option<(i64, u64, f64)> = None;
    for den in 1..=max_den {
        let num = (x * den as f64).round();
        let err = (x - num / den as f64).abs();
        if err <= tol && best.is_none_or(|(_, _, e)| err < e - 1e-15) {
            best = Some((num as i64, den, err));
        }
    }
    best.map(|(n, d, _)| {
        let g = num_integer::gcd(n.unsigned_abs(), d);
        (n / g as i64, d / g)
    })
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Field elements used by the interpolation and difference routines: either
/// `f64` or exact rationals.
pub trait Scalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + std::fmt::Debug
{
    fn from_bigint(v: &BigInt) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
    /// True when `self` is negligible next to `scale`.
    fn negligible(&self, scale: f64) -> bool;

    fn from_biguint(v: &BigUint) -> Self {
        Self::from_bigint(&BigInt::from(v.clone()))
    }
}

impl Scalar for f64 {
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn negligible(&self, scale: f64) -> bool {
        self.abs() <= 1e-12 * scale
    }
}

impl Scalar for BigRational {
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }
    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

/// Relative comparison with a scale floor so that exact zeros compare equal.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial_f64(10_000, 2), 49_995_000.0);
    }

    #[test]
    fn pochhammer_cases() {
        assert_eq!(pochhammer(5, 2), BigUint::from(20u32));
        for n in 0..6 {
            assert_eq!(pochhammer(n, 0), BigUint::one());
        }
        assert_eq!(pochhammer(3, 4), BigUint::zero());
        assert_eq!(pochhammer(0, 1), BigUint::zero());
        assert_eq!(pochhammer(4, 4), BigUint::from(24u32));
    }

    #[test]
    fn rational_recognition() {
        assert_eq!(approximate_rational(2.0, 16, 1e-6), Some((2, 1)));
        assert_eq!(approximate_rational(0.5 + 1e-9, 16, 1e-6), Some((1, 2)));
        assert_eq!(approximate_rational(2.0 / 3.0, 16, 1e-6), Some((2, 3)));
        assert_eq!(approximate_rational(std::f64::consts::PI, 16, 1e-6), None);
    }
}

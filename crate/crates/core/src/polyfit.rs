//! Interpolation of `n -> a_n^p` by polynomials on the integer nodes
//! `0, 1, ..., m-1`, and the three equivalent ways of extrapolating the
//! interpolant: Lagrange normal form, Newton form and barycentric form.
//!
//! Everything is generic over [`Scalar`], so the same code runs on `f64`
//! and on exact rationals.

use crate::error::{invalid, Result};
use crate::numeric::{binomial, pochhammer, Scalar};
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

/// Real polynomial stored by ascending coefficients.
///
/// Trailing coefficients that are negligible next to the largest one are
/// dropped on construction, so [`Polynomial::degree`] is meaningful.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct Polynomial<T = f64> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        let scale = coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max);
        while coeffs.last().is_some_and(|c| c.negligible(scale)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coefficient(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_at(&self, n: i64) -> T {
        self.eval(&T::from_i64(n))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }
}

/// Newton coefficients `beta_k = (Delta^k a)_0 / k!` of the samples taken at
/// the nodes `0..samples.len()`. These are the coefficients of the
/// interpolant in the falling-factorial basis `n^(k)`.
pub fn newton_coefficients<T: Scalar>(samples: &[T]) -> Vec<T> {
    let mut table = samples.to_vec();
    let mut betas = Vec::with_capacity(samples.len());
    let mut factorial = BigInt::one();
    for k in 0..samples.len() {
        if k > 0 {
            factorial *= k;
        }
        betas.push(table[0].clone() / T::from_bigint(&factorial));
        for i in 0..table.len().saturating_sub(1) {
            table[i] = table[i + 1].clone() - table[i].clone();
        }
        table.pop();
    }
    betas
}

/// Unique interpolant of degree `< samples.len()` through
/// `(k, samples[k])`, built from the Newton divided-difference table.
pub fn interpolate<T: Scalar>(samples: &[T]) -> Polynomial<T> {
    let betas = newton_coefficients(samples);
    let mut coeffs = vec![T::zero(); samples.len()];
    // basis holds n^(k) in the monomial basis
    let mut basis = vec![T::one()];
    for (k, beta) in betas.iter().enumerate() {
        for (c, b) in coeffs.iter_mut().zip(&basis) {
            *c = c.clone() + beta.clone() * b.clone();
        }
        let shift = T::from_i64(k as i64);
        let mut next = vec![T::zero(); basis.len() + 1];
        for (i, b) in basis.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + b.clone();
            next[i] = next[i].clone() - shift.clone() * b.clone();
        }
        basis = next;
    }
    Polynomial::new(coeffs)
}

fn signed(v: num_bigint::BigUint, negative: bool) -> BigInt {
    let v = BigInt::from(v);
    if negative {
        -v
    } else {
        v
    }
}

/// Value at `n >= m` of the interpolant through the `m` samples, from the
/// normal form of the Lagrange polynomial:
/// `sum_k (-1)^(m-1-k) C(n,k) C(n-1-k, m-1-k) samples[k]`.
///
/// The integer weights are formed exactly before conversion, so large `n`
/// does not overflow.
pub fn eval_lagrange_normal<T: Scalar>(samples: &[T], n: u64) -> Result<T> {
    let m = samples.len() as u64;
    if m == 0 {
        return invalid("no samples");
    }
    if n < m {
        return invalid(format!("Lagrange normal form needs n >= m (n = {n}, m = {m})"));
    }
    let mut acc = T::zero();
    for (k, s) in samples.iter().enumerate() {
        let k = k as u64;
        let weight = binomial(n, k) * binomial(n - 1 - k, m - 1 - k);
        let w = signed(weight, (m - 1 - k) % 2 == 1);
        acc = acc + T::from_bigint(&w) * s.clone();
    }
    Ok(acc)
}

/// Newton form `sum_k n^(k) beta_k`; valid for every `n`.
pub fn eval_newton<T: Scalar>(betas: &[T], n: u64) -> T {
    betas
        .iter()
        .enumerate()
        .take_while(|(k, _)| *k as u64 <= n)
        .fold(T::zero(), |acc, (k, b)| acc + T::from_biguint(&pochhammer(n, k as u64)) * b.clone())
}

/// Barycentric form with weights `(-1)^(m-1-k) C(m-1,k) / (n-k)`; needs
/// `n >= m` so no weight has a zero denominator.
pub fn eval_barycentric<T: Scalar>(samples: &[T], n: u64) -> Result<T> {
    let m = samples.len() as u64;
    if m == 0 {
        return invalid("no samples");
    }
    if n < m {
        return invalid(format!("barycentric form needs n >= m (n = {n}, m = {m})"));
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for (k, s) in samples.iter().enumerate() {
        let k = k as u64;
        let c = signed(binomial(m - 1, k), (m - 1 - k) % 2 == 1);
        let w = T::from_bigint(&c) / T::from_i64((n - k) as i64);
        num = num + w.clone() * s.clone();
        den = den + w;
    }
    Ok(num / den)
}

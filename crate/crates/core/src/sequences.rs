//! Difference calculus on finite prefixes of positive sequences.
//!
//! The difference operator is `(D a)_n = a_n - a_{n+1}`, so
//! `(D^m a)_n = sum_k (-1)^k C(m,k) a_{n+k}`. A positive sequence `a` lies in
//! `A_{m,p}` when `D^m a^p = 0`, i.e. when `n -> a_n^p` is a polynomial of
//! degree below `m`. Every verdict produced here only speaks for the
//! observed prefix (the horizon); nothing is claimed past it.

use crate::error::{invalid, Error, Result};
use crate::numeric::{approximate_rational, binomial, binomial_f64, rational_from_f64, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Default relative tolerance for declaring a difference zero.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Exact closed-form rule `n -> P(n)^(1/inv_power)` with rational
/// polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    PolyPower { coeffs: Vec<BigRational>, inv_power: f64 },
}

impl Generator {
    pub fn poly_power(coeffs: &[f64], inv_power: f64) -> Result<Self> {
        if !(inv_power > 0.0 && inv_power.is_finite()) {
            return invalid(format!("inv_power must be positive, got {inv_power}"));
        }
        let coeffs = coeffs
            .iter()
            .map(|&c| rational_from_f64(c).ok_or_else(|| Error::InvalidArgument(format!("non-finite coefficient {c}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Generator::PolyPower { coeffs, inv_power })
    }

    fn base(&self, n: usize) -> BigRational {
        let Generator::PolyPower { coeffs, .. } = self;
        let x = BigRational::from_integer(BigInt::from(n));
        coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * &x + c)
    }

    pub fn value(&self, n: usize) -> f64 {
        let Generator::PolyPower { inv_power, .. } = self;
        Scalar::to_f64(&self.base(n)).powf(1.0 / inv_power)
    }

    /// `a_n^p` in exact arithmetic when `p / inv_power` is a positive integer.
    pub fn exact_power(&self, n: usize, p: f64) -> Option<BigRational> {
        let k = self.integer_ratio(p)?;
        Some(num_traits::pow(self.base(n), k))
    }

    fn integer_ratio(&self, p: f64) -> Option<usize> {
        let Generator::PolyPower { inv_power, .. } = self;
        let ratio = p / inv_power;
        let k = ratio.round();
        ((ratio - k).abs() <= 1e-12 * ratio.abs() && (1.0..=64.0).contains(&k)).then_some(k as usize)
    }

    /// Generator of `a^p`.
    pub fn powered(&self, p: f64) -> Self {
        let Generator::PolyPower { coeffs, inv_power } = self;
        Generator::PolyPower { coeffs: coeffs.clone(), inv_power: inv_power / p }
    }
}

/// Finite prefix `a_0, ..., a_{N-1}` of a strictly positive sequence,
/// optionally backed by an exact generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSequencePrefix {
    values: Vec<f64>,
    generator: Option<Generator>,
}

impl PositiveSequencePrefix {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("a sequence prefix needs at least one value");
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return invalid(format!("value {v} at index {i} is not a positive finite number"));
        }
        Ok(Self { values, generator: None })
    }

    pub fn from_generator(generator: Generator, len: usize) -> Result<Self> {
        let values = (0..len).map(|n| generator.value(n)).collect();
        let mut seq = Self::new(values)?;
        seq.generator = Some(generator);
        Ok(seq)
    }

    /// Attach a generator to stored values; they must agree to `1e-12`.
    pub fn with_generator(values: Vec<f64>, generator: Generator) -> Result<Self> {
        let mut seq = Self::new(values)?;
        for (n, v) in seq.values.iter().enumerate() {
            let g = generator.value(n);
            if (g - v).abs() > 1e-12 * v.abs().max(g.abs()) {
                return invalid(format!("generator gives {g} at index {n}, stored value is {v}"));
            }
        }
        seq.generator = Some(generator);
        Ok(seq)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    /// Prefix of length `len`, extended through the generator if needed.
    pub fn extended(&self, len: usize) -> Result<Self> {
        if len <= self.len() {
            return Ok(Self { values: self.values[..len.max(1)].to_vec(), generator: self.generator.clone() });
        }
        match &self.generator {
            Some(g) => Self::from_generator(g.clone(), len),
            None => invalid("cannot extend a prefix without a generator"),
        }
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| (v - first).abs() <= tol * v.max(first))
    }
}

/// `m`-th difference `(D^m a)_n` for every shift that fits in the prefix.
pub fn difference<T: Scalar>(a: &[T], m: usize) -> Result<Vec<T>> {
    if m >= a.len() {
        return invalid(format!("difference order {m} needs more than {} values", a.len()));
    }
    let weights: Vec<T> = (0..=m)
        .map(|k| {
            let c = BigInt::from(binomial(m as u64, k as u64));
            T::from_bigint(&if k % 2 == 1 { -c } else { c })
        })
        .collect();
    Ok((0..a.len() - m)
        .map(|n| weights.iter().zip(&a[n..=n + m]).fold(T::zero(), |acc, (w, v)| acc + w.clone() * v.clone()))
        .collect())
}

/// Elementwise `a^p`.
pub fn power_sequence(a: &PositiveSequencePrefix, p: f64) -> Result<PositiveSequencePrefix> {
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("exponent must be positive, got {p}"));
    }
    let values = a.values.iter().map(|v| v.powf(p)).collect();
    let mut out = PositiveSequencePrefix::new(values)?;
    out.generator = a.generator.as_ref().map(|g| g.powered(p));
    Ok(out)
}

/// Why a sequence was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonMembership {
    /// `(D^m a^p)_n` is not zero at this shift.
    Shift(usize),
    /// The sequence already lies in `A_{order,p}`, so it is not strict.
    LowerOrder(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    ExactMember,
    ToleranceMember,
    NotMember { witness: NonMembership },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipVerdict {
    #[serde(flatten)]
    pub status: Membership,
    /// Largest `|(D^m a^p)_n| / sum_k C(m,k) a_{n+k}^p` over the horizon.
    pub max_residual: f64,
    pub horizon: usize,
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        !matches!(self.status, Membership::NotMember { .. })
    }
}

/// `a^p` as exact rationals, when that is possible. The flag is true when
/// the rationals come from an exact generator rather than from floats.
fn exact_powers(a: &PositiveSequencePrefix, p: f64) -> Option<(Vec<BigRational>, bool)> {
    if let Some(g) = &a.generator {
        if let Some(vals) = (0..a.len()).map(|n| g.exact_power(n, p)).collect::<Option<Vec<_>>>() {
            return Some((vals, true));
        }
    }
    // float data only when integral: anything else rarely cancels exactly
    if p.fract() == 0.0 && (1.0..=64.0).contains(&p) && a.values.iter().all(|v| v.fract() == 0.0 && *v < 1e15) {
        let k = p as usize;
        let vals = a
            .values
            .iter()
            .map(|&v| rational_from_f64(v).map(|r| num_traits::pow(r, k)))
            .collect::<Option<Vec<_>>>()?;
        return Some((vals, false));
    }
    None
}

/// Relative residuals of `D^m a^p` at every shift, computed on `a / max(a)`
/// so large exponents do not overflow.
fn relative_residuals(values: &[f64], m: usize, p: f64) -> Vec<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let powered: Vec<f64> = values.iter().map(|v| (v / max).powf(p)).collect();
    relative_residuals_of_powers(&powered, m)
}

fn relative_residuals_of_powers(powered: &[f64], m: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..=m).map(|k| binomial_f64(m as u64, k as u64)).collect();
    (0..powered.len() - m)
        .map(|n| {
            let (mut signed, mut mass) = (0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                let t = w * powered[n + k];
                mass += t;
                signed += if k % 2 == 1 { -t } else { t };
            }
            if mass == 0.0 {
                0.0
            } else {
                signed.abs() / mass
            }
        })
        .collect()
}

fn check_args(a: &PositiveSequencePrefix, m: usize, p: f64, tol: f64) -> Result<()> {
    if m == 0 {
        return invalid("order m must be at least 1");
    }
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("exponent must be positive, got {p}"));
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if a.len() < m + 1 {
        return invalid(format!("order {m} needs a prefix of length >= {}, got {}", m + 1, a.len()));
    }
    Ok(())
}

/// Membership of `a` in `A_{m,p}` on the observed prefix.
///
/// Exact rational arithmetic is used whenever `a^p` is exactly representable
/// (a generator with `p / inv_power` integral, or integral values with an
/// integral `p`). A
/// generator-backed nonzero difference is a definite rejection; float data
/// with a nonzero exact difference falls back to the relative tolerance.
pub fn is_in_a_mp(a: &PositiveSequencePrefix, m: usize, p: f64, tol: f64) -> Result<MembershipVerdict> {
    check_args(a, m, p, tol)?;
    let horizon = a.len();
    // a constant sequence has constant powers for every p
    if a.values.iter().all(|&v| v == a.values[0]) {
        return Ok(MembershipVerdict { status: Membership::ExactMember, max_residual: 0.0, horizon });
    }
    if let Some((exact, from_generator)) = exact_powers(a, p) {
        let diffs = difference(&exact, m)?;
        if diffs.iter().all(Zero::is_zero) {
            return Ok(MembershipVerdict { status: Membership::ExactMember, max_residual: 0.0, horizon });
        }
        if from_generator {
            let rel = exact_relative_residuals(&exact, &diffs, m);
            let witness = diffs.iter().position(|d| !d.is_zero()).unwrap_or(0);
            let max_residual = rel.iter().cloned().fold(0.0, f64::max);
            return Ok(MembershipVerdict {
                status: Membership::NotMember { witness: NonMembership::Shift(witness) },
                max_residual,
                horizon,
            });
        }
    }
    let rel = relative_residuals(&a.values, m, p);
    let max_residual = rel.iter().cloned().fold(0.0, f64::max);
    let status = match rel.iter().position(|&r| !(r <= tol)) {
        Some(n) => Membership::NotMember { witness: NonMembership::Shift(n) },
        None => Membership::ToleranceMember,
    };
    Ok(MembershipVerdict { status, max_residual, horizon })
}

fn exact_relative_residuals(powers: &[BigRational], diffs: &[BigRational], m: usize) -> Vec<f64> {
    diffs
        .iter()
        .enumerate()
        .map(|(n, d)| {
            let mass = (0..=m).fold(BigRational::zero(), |acc, k| {
                acc + BigRational::from_integer(binomial(m as u64, k as u64).into()) * &powers[n + k]
            });
            if mass.is_zero() {
                0.0
            } else {
                ToPrimitive::to_f64(&(d.abs() / mass)).unwrap_or(f64::INFINITY)
            }
        })
        .collect()
}

/// Membership in the strict set: `D^m a^p = 0` and `D^{m-1} a^p != 0`.
/// For `m = 1` strictness is the same as being constant.
pub fn is_strict_a_mp(a: &PositiveSequencePrefix, m: usize, p: f64, tol: f64) -> Result<MembershipVerdict> {
    let top = is_in_a_mp(a, m, p, tol)?;
    if m == 1 || !top.is_member() {
        return Ok(top);
    }
    let lower = is_in_a_mp(a, m - 1, p, tol)?;
    if lower.is_member() {
        return Ok(MembershipVerdict {
            status: Membership::NotMember { witness: NonMembership::LowerOrder(m - 1) },
            ..top
        });
    }
    Ok(top)
}

/// Budget for the exponent search behind [`classify_rho`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSearch {
    pub m_max: usize,
    pub p_max: f64,
    pub p_min: f64,
    pub grid_points: usize,
    pub tol: f64,
}

impl Default for RhoSearch {
    fn default() -> Self {
        Self { m_max: 8, p_max: 32.0, p_min: 1e-3, grid_points: 4000, tol: DEFAULT_TOL }
    }
}

/// Shape of `rho(a)`, the set of pairs `(m, p)` with `a` in `A_{m,p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum RhoClassification {
    /// No pair on the horizon: every order testable on the prefix was scanned.
    Empty { horizon: usize },
    /// Constant sequence: every pair qualifies and strict pairs are `{1} x (0, inf)`.
    ConstantAll,
    /// Strict pairs are exactly `(k(m0-1)+1, k p0)`, `k >= 1`.
    Lattice {
        m0: usize,
        p0: f64,
        /// `p0` as `(num, den)` when it is within `1e-6` of a fraction with denominator at most 16.
        p0_rational: Option<(i64, u64)>,
    },
    /// The search budget ran out before every testable order was scanned.
    Undecidable { m_max: usize, horizon: usize },
}

/// Normalised `g_n(p) = sum_k (-1)^k C(m,k) a_{n+k}^p` divided by its
/// positive mass; lies in `[-1, 1]`.
fn normalized_g(logs: &[f64], weights: &[f64], p: f64) -> f64 {
    let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut signed, mut mass) = (0.0, 0.0);
    for (k, (w, l)) in weights.iter().zip(logs).enumerate() {
        let t = w * (p * (l - lmax)).exp();
        mass += t;
        signed += if k % 2 == 1 { -t } else { t };
    }
    signed / mass
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..120 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Exponent roots in `[p_min, p_max]` of the normalised `g_n` at the first
/// shift where it does not vanish identically. Sign changes are bisected;
/// near-zero local minima of `|g|` are refined as touching roots.
pub fn exponent_roots(a: &PositiveSequencePrefix, m: usize, search: &RhoSearch) -> Result<Vec<f64>> {
    if a.len() < m + 1 {
        return invalid(format!("order {m} needs a prefix of length >= {}", m + 1));
    }
    let weights: Vec<f64> = (0..=m).map(|k| binomial_f64(m as u64, k as u64)).collect();
    let logs: Vec<f64> = a.values.iter().map(|v| v.ln()).collect();
    let n_points = search.grid_points.max(16);
    let ratio = (search.p_max / search.p_min).ln() / (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points).map(|i| search.p_min * (ratio * i as f64).exp()).collect();

    for n in 0..a.len() - m {
        let window = &logs[n..=n + m];
        let g = |p: f64| normalized_g(window, &weights, p);
        let vals: Vec<f64> = grid.iter().map(|&p| g(p)).collect();
        if vals.iter().all(|v| v.abs() <= 1e-14) {
            continue;
        }
        let mut roots = Vec::new();
        for i in 0..n_points - 1 {
            let (x0, x1, v0, v1) = (grid[i], grid[i + 1], vals[i], vals[i + 1]);
            if v0 == 0.0 {
                roots.push(x0);
            } else if v0.signum() != v1.signum() && v1 != 0.0 {
                roots.push(bisect(&g, x0, x1));
            }
            if i > 0 && vals[i].abs() < vals[i - 1].abs() && vals[i].abs() < v1.abs() && vals[i].abs() < 1e-3 {
                let h = |p: f64| g(p).abs();
                let r = golden_min(&h, grid[i - 1], x1);
                if h(r) <= 1e-12 {
                    roots.push(r);
                }
            }
        }
        if vals[n_points - 1] == 0.0 {
            roots.push(grid[n_points - 1]);
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs());
        return Ok(roots);
    }
    Ok(Vec::new())
}

/// Exponents `p` with `a` in `A_{m,p}` on the horizon. Roots close to a
/// small fraction are snapped to it when the snapped value still verifies.
pub fn admissible_exponents(
    a: &PositiveSequencePrefix,
    m: usize,
    search: &RhoSearch,
) -> Result<Vec<(f64, MembershipVerdict)>> {
    let mut out: Vec<(f64, MembershipVerdict)> = Vec::new();
    for root in exponent_roots(a, m, search)? {
        let snapped = approximate_rational(root, 16, 1e-6).map(|(n, d)| n as f64 / d as f64);
        let mut chosen = None;
        if let Some(s) = snapped.filter(|s| *s > 0.0) {
            let v = is_in_a_mp(a, m, s, search.tol)?;
            if v.is_member() {
                chosen = Some((s, v));
            }
        }
        if chosen.is_none() {
            let v = is_in_a_mp(a, m, root, search.tol)?;
            if v.is_member() {
                chosen = Some((root, v));
            }
        }
        if let Some((p, v)) = chosen {
            if !out.iter().any(|(q, _)| (q - p).abs() <= 1e-9 * p) {
                out.push((p, v));
            }
        }
    }
    Ok(out)
}

/// Decide which of the three possible shapes `rho(a)` takes on the prefix.
///
/// Orders `m = 2..=m_max` are scanned in turn; the first order at which some
/// exponent gives strict membership is `m0`, and that exponent is `p0`.
pub fn classify_rho(a: &PositiveSequencePrefix, search: &RhoSearch) -> Result<RhoClassification> {
    if a.len() == 1 || a.is_constant(search.tol) {
        return Ok(RhoClassification::ConstantAll);
    }
    if a.len() < search.m_max + 2 {
        return invalid(format!(
            "classification up to order {} needs a prefix of length >= {}, got {}",
            search.m_max,
            search.m_max + 2,
            a.len()
        ));
    }
    for m in 2..=search.m_max {
        let mut best: Option<(f64, f64)> = None;
        for (p, v) in admissible_exponents(a, m, search)? {
            if !is_strict_a_mp(a, m, p, search.tol)?.is_member() {
                continue;
            }
            if best.is_none_or(|(_, r)| v.max_residual < r) {
                best = Some((p, v.max_residual));
            }
        }
        if let Some((p0, _)) = best {
            return Ok(RhoClassification::Lattice { m0: m, p0, p0_rational: approximate_rational(p0, 16, 1e-6) });
        }
    }
    if search.m_max + 2 >= a.len() {
        Ok(RhoClassification::Empty { horizon: a.len() })
    } else {
        Ok(RhoClassification::Undecidable { m_max: search.m_max, horizon: a.len() })
    }
}

/// On-disk sequence description: a plain array of positive numbers or an
/// exact closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceFile {
    Values(Vec<f64>),
    Closed { form: String, expr_id: String, coeffs: Vec<f64>, inv_power: f64 },
}

impl SequenceFile {
    /// Materialise the prefix; closed forms are evaluated up to `horizon`.
    pub fn to_prefix(&self, horizon: usize) -> Result<PositiveSequencePrefix> {
        match self {
            SequenceFile::Values(v) => PositiveSequencePrefix::new(v.clone()),
            SequenceFile::Closed { form, expr_id, coeffs, inv_power } => {
                if form != "closed" || expr_id != "poly_power" {
                    return invalid(format!("unsupported closed form `{form}`/`{expr_id}`"));
                }
                PositiveSequencePrefix::from_generator(Generator::poly_power(coeffs, *inv_power)?, horizon)
            }
        }
    }
}

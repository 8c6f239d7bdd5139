//! Operators on finite-dimensional `l_p` spaces: dense matrices over the
//! reals or complexes, and weighted right shifts on a truncated sequence
//! space. Orbit norms, the `beta` functions and the `(m,p)` checks live here.

use crate::error::{invalid, Error, Result};
use crate::numeric::{binomial, binomial_f64, rational_from_f64};
use crate::sequences::{PositiveSequencePrefix, DEFAULT_TOL};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type Vector = Vec<Complex64>;

/// Exponent of the ambient `l_p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    P(f64),
    Inf,
}

impl NormKind {
    pub fn l1() -> Self {
        NormKind::P(1.0)
    }

    pub fn l2() -> Self {
        NormKind::P(2.0)
    }

    pub fn norm(&self, x: &[Complex64]) -> f64 {
        match *self {
            NormKind::Inf => x.iter().map(|v| v.norm()).fold(0.0, f64::max),
            NormKind::P(2.0) => x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::P(1.0) => x.iter().map(|v| v.norm()).sum(),
            NormKind::P(p) => x.iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            NormKind::P(p) => Some(p),
            NormKind::Inf => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            NormKind::P(p) => format!("l{p}"),
            NormKind::Inf => "linf".to_string(),
        }
    }
}

impl Serialize for NormKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormKind::P(p) => s.serialize_f64(*p),
            NormKind::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) if p > 0.0 && p.is_finite() => Ok(NormKind::P(p)),
            Raw::Num(p) => Err(serde::de::Error::custom(format!("norm exponent must be positive, got {p}"))),
            Raw::Str(s) if s == "inf" => Ok(NormKind::Inf),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unknown norm `{s}`, expected a number or \"inf\""))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Square matrix acting on `(K^d, ||.||_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    field: Field,
    entries: DMatrix<Complex64>,
    norm: NormKind,
}

impl DenseMatrix {
    pub fn new(field: Field, entries: DMatrix<Complex64>, norm: NormKind) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return invalid(format!(
                "matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            ));
        }
        if field == Field::Real && entries.iter().any(|z| z.im != 0.0) {
            return invalid("real matrix has entries with a nonzero imaginary part");
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix has non-finite entries");
        }
        Ok(Self { field, entries, norm })
    }

    pub fn real(rows: &[&[f64]], norm: NormKind) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return invalid("matrix rows must all have length equal to the row count");
        }
        let entries = DMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(Field::Real, entries, norm)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn with_norm(&self, norm: NormKind) -> Self {
        Self { norm, ..self.clone() }
    }

    pub fn power(&self, k: usize) -> DMatrix<Complex64> {
        let d = self.dim();
        (0..k).fold(DMatrix::identity(d, d), |acc, _| &self.entries * acc)
    }
}

/// Weight rule of a right shift `(Tx)_0 = 0`, `(Tx)_n = w_n x_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum ShiftWeights {
    /// `w_n = ((1 + (n+1)(lambda^2-1)) / (1 + n(lambda^2-1)))^(1/p)`.
    Bayart { lambda: f64, p: f64 },
    /// `values[i]` is `w_{i+1}`; every later weight is `tail`.
    List { values: Vec<f64>, tail: f64 },
}

impl ShiftWeights {
    pub fn weight(&self, n: usize) -> f64 {
        match self {
            ShiftWeights::Bayart { lambda, p } => {
                let c = lambda * lambda - 1.0;
                ((1.0 + (n as f64 + 1.0) * c) / (1.0 + n as f64 * c)).powf(1.0 / p)
            }
            ShiftWeights::List { values, tail } => values.get(n.wrapping_sub(1)).copied().unwrap_or(*tail),
        }
    }

    /// `w_n^q` as an exact rational, when it is one.
    pub fn weight_power_exact(&self, n: usize, q: f64) -> Option<BigRational> {
        match self {
            ShiftWeights::Bayart { lambda, p } => {
                let k = integral_ratio(q, *p)?;
                let l = rational_from_f64(*lambda)?;
                let c = &l * &l - BigRational::one();
                let n = BigRational::from_integer(BigInt::from(n));
                let ratio = (BigRational::one() + (&n + BigRational::one()) * &c) / (BigRational::one() + n * c);
                Some(num_traits::pow(ratio, k))
            }
            ShiftWeights::List { .. } => {
                let k = integral_ratio(q, 1.0)?;
                Some(num_traits::pow(rational_from_f64(self.weight(n))?, k))
            }
        }
    }
}

fn integral_ratio(q: f64, p: f64) -> Option<usize> {
    let r = q / p;
    let k = r.round();
    ((r - k).abs() <= 1e-12 * r && (1.0..=64.0).contains(&k)).then_some(k as usize)
}

/// Weighted right shift restricted to the first `truncation` coordinates;
/// mass pushed past the last coordinate is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedShift {
    weights: ShiftWeights,
    space: NormKind,
    truncation: usize,
    cached: Vec<f64>,
}

impl WeightedShift {
    pub fn new(weights: ShiftWeights, space: NormKind, truncation: usize) -> Result<Self> {
        if truncation < 2 {
            return invalid("shift truncation must be at least 2");
        }
        match &weights {
            ShiftWeights::Bayart { lambda, p } => {
                if !(*lambda >= 1.0 && lambda.is_finite()) {
                    return invalid(format!("Bayart weights need lambda >= 1, got {lambda}"));
                }
                if !(*p > 0.0 && p.is_finite()) {
                    return invalid(format!("Bayart weights need p > 0, got {p}"));
                }
            }
            ShiftWeights::List { values, tail } => {
                if values.iter().chain(std::iter::once(tail)).any(|w| !(*w > 0.0 && w.is_finite())) {
                    return invalid("shift weights must be positive and finite");
                }
            }
        }
        let cached = (0..truncation).map(|n| if n == 0 { 0.0 } else { weights.weight(n) }).collect();
        Ok(Self { weights, space, truncation, cached })
    }

    pub fn weights(&self) -> &ShiftWeights {
        &self.weights
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.cached[n]
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn space(&self) -> NormKind {
        self.space
    }
}

/// The operator `T` under study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorFile", into = "OperatorFile")]
pub enum OperatorSpec {
    Dense(DenseMatrix),
    Shift(WeightedShift),
}

impl OperatorSpec {
    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::Dense(d) => d.dim(),
            OperatorSpec::Shift(s) => s.truncation,
        }
    }

    pub fn norm_kind(&self) -> NormKind {
        match self {
            OperatorSpec::Dense(d) => d.norm,
            OperatorSpec::Shift(s) => s.space,
        }
    }

    pub fn with_norm(&self, norm: NormKind) -> Self {
        match self {
            OperatorSpec::Dense(d) => OperatorSpec::Dense(d.with_norm(norm)),
            OperatorSpec::Shift(s) => OperatorSpec::Shift(WeightedShift { space: norm, ..s.clone() }),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            OperatorSpec::Dense(d) => d.field,
            OperatorSpec::Shift(_) => Field::Real,
        }
    }

    pub fn as_dense(&self) -> Option<&DenseMatrix> {
        match self {
            OperatorSpec::Dense(d) => Some(d),
            OperatorSpec::Shift(_) => None,
        }
    }

    pub fn norm(&self, x: &[Complex64]) -> f64 {
        self.norm_kind().norm(x)
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vector> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[Complex64]) -> Vector {
        match self {
            OperatorSpec::Dense(d) => {
                let m = &d.entries;
                (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
            }
            OperatorSpec::Shift(s) => {
                let mut y = vec![Complex64::zero(); x.len()];
                for n in 1..x.len() {
                    y[n] = x[n - 1] * s.cached[n];
                }
                y
            }
        }
    }

    /// `||T^n x||` for `n = 0..len`, by repeated application.
    pub fn orbit_norm_values(&self, x: &[Complex64], len: usize) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut out = Vec::with_capacity(len);
        let mut v = x.to_vec();
        for n in 0..len {
            if n > 0 {
                v = self.apply_unchecked(&v);
            }
            out.push(self.norm(&v));
        }
        Ok(out)
    }
}

/// Serialized form of an operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OperatorFile {
    Dense { field: Field, entries: Vec<Vec<ScalarEntry>>, norm_p: NormKind },
    Shift { weights: ShiftWeights, space_p: NormKind, truncation: usize },
}

/// A matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl TryFrom<OperatorFile> for OperatorSpec {
    type Error = Error;

    fn try_from(f: OperatorFile) -> Result<Self> {
        match f {
            OperatorFile::Dense { field, entries, norm_p } => {
                let d = entries.len();
                if let Some((i, r)) = entries.iter().enumerate().find(|(_, r)| r.len() != d) {
                    return invalid(format!("row {i} has {} entries, expected {d}", r.len()));
                }
                let m = DMatrix::from_fn(d, d, |i, j| match entries[i][j] {
                    ScalarEntry::Real(re) => Complex64::new(re, 0.0),
                    ScalarEntry::Complex([re, im]) => Complex64::new(re, im),
                });
                Ok(OperatorSpec::Dense(DenseMatrix::new(field, m, norm_p)?))
            }
            OperatorFile::Shift { weights, space_p, truncation } => {
                Ok(OperatorSpec::Shift(WeightedShift::new(weights, space_p, truncation)?))
            }
        }
    }
}

impl From<OperatorSpec> for OperatorFile {
    fn from(op: OperatorSpec) -> Self {
        match op {
            OperatorSpec::Dense(d) => OperatorFile::Dense {
                field: d.field,
                entries: (0..d.dim())
                    .map(|i| {
                        (0..d.dim())
                            .map(|j| {
                                let z = d.entries[(i, j)];
                                match d.field {
                                    Field::Real => ScalarEntry::Real(z.re),
                                    Field::Complex => ScalarEntry::Complex([z.re, z.im]),
                                }
                            })
                            .collect()
                    })
                    .collect(),
                norm_p: d.norm,
            },
            OperatorSpec::Shift(s) => {
                OperatorFile::Shift { weights: s.weights, space_p: s.space, truncation: s.truncation }
            }
        }
    }
}

/// Weighted shift with the Bayart weight rule.
pub fn make_bayart_shift(lambda: f64, p_w: f64, space: NormKind, truncation: usize) -> Result<OperatorSpec> {
    Ok(OperatorSpec::Shift(WeightedShift::new(ShiftWeights::Bayart { lambda, p: p_w }, space, truncation)?))
}

/// `(||T^n x||)_{n < len}` as a positive sequence prefix.
pub fn orbit_norms(op: &OperatorSpec, x: &[Complex64], len: usize) -> Result<PositiveSequencePrefix> {
    if len == 0 {
        return invalid("orbit length must be at least 1");
    }
    let values = op.orbit_norm_values(x, len)?;
    if values[0] == 0.0 {
        return invalid("orbit of the zero vector");
    }
    if let Some(step) = values.iter().position(|v| *v == 0.0) {
        return Err(Error::OrbitVanished { step });
    }
    PositiveSequencePrefix::new(values)
}

fn signed_binomial_sum(powers: &[f64], l: usize) -> f64 {
    (0..=l)
        .map(|j| {
            let c = binomial_f64(l as u64, j as u64) * powers[j];
            if (l - j) % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .sum()
}

fn factorial(l: usize) -> f64 {
    (1..=l).map(|k| k as f64).product()
}

/// `beta_l^(p)(T, x) = (1/l!) sum_j (-1)^(l-j) C(l,j) ||T^j x||^p`.
pub fn beta(op: &OperatorSpec, x: &[Complex64], l: usize, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return invalid("exponent must be positive");
    }
    let powers: Vec<f64> = op.orbit_norm_values(x, l + 1)?.iter().map(|v| v.powf(p)).collect();
    Ok(signed_binomial_sum(&powers, l) / factorial(l))
}

/// Both sides of `l! (beta_l(T,Tx) - beta_l(T,x)) = (l+1)! beta_{l+1}(T,x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaRecurrence {
    /// Left side minus right side.
    pub residual: f64,
    /// `sum_j C(l+1,j) ||T^j x||^p`, the positive mass of the right side.
    pub scale: f64,
}

impl BetaRecurrence {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / self.scale
        }
    }
}

pub fn beta_recurrence_residual(op: &OperatorSpec, x: &[Complex64], l: usize, p: f64) -> Result<BetaRecurrence> {
    if !(p > 0.0) {
        return invalid("exponent must be positive");
    }
    let tx = op.apply(x)?;
    let from_x: Vec<f64> = op.orbit_norm_values(x, l + 2)?.iter().map(|v| v.powf(p)).collect();
    let from_tx: Vec<f64> = op.orbit_norm_values(&tx, l + 1)?.iter().map(|v| v.powf(p)).collect();
    let lhs = signed_binomial_sum(&from_tx, l) - signed_binomial_sum(&from_x[..=l], l);
    let rhs = signed_binomial_sum(&from_x, l + 1);
    let scale = (0..=l + 1).map(|j| binomial_f64(l as u64 + 1, j as u64) * from_x[j]).sum();
    Ok(BetaRecurrence { residual: lhs - rhs, scale })
}

/// How an `(m,p)` check was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `sum_k (-1)^k C(m,k) T*^k T^k = 0` on `(K^d, l_2)`, `p = 2`.
    HilbertExact,
    /// Coordinatewise identity on the weights of a shift, `p` = space exponent.
    ShiftCoefficient,
    /// The defining sum evaluated on seeded random unit vectors.
    Sampled,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::HilbertExact => "hilbert",
            Strategy::ShiftCoefficient => "shift",
            Strategy::Sampled => "sampled",
        }
    }
}

/// Requested strategy; `Auto` picks an exact one when it applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrategyChoice {
    #[default]
    Auto,
    Hilbert,
    Shift,
    Sampled,
}

impl std::str::FromStr for StrategyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "hilbert" => Ok(Self::Hilbert),
            "shift" => Ok(Self::Shift),
            "sampled" => Ok(Self::Sampled),
            other => invalid(format!("unknown strategy `{other}`")),
        }
    }
}

/// Counterexample to a check: the offending vector and, for window
/// conditions, the window start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub vector: Vector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VerdictStatus {
    HoldsExact,
    /// Deterministic check, every residual within tolerance.
    HoldsWithinTolerance {
        checks: usize,
        max_relative_residual: f64,
    },
    HoldsSampled {
        samples: usize,
        max_relative_residual: f64,
    },
    Fails {
        witness: Witness,
        residual: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub status: VerdictStatus,
    pub strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self.status, VerdictStatus::Fails { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.status {
            VerdictStatus::Fails { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn max_relative_residual(&self) -> f64 {
        match &self.status {
            VerdictStatus::HoldsExact => 0.0,
            VerdictStatus::HoldsWithinTolerance { max_relative_residual, .. }
            | VerdictStatus::HoldsSampled { max_relative_residual, .. } => *max_relative_residual,
            VerdictStatus::Fails { residual, .. } => *residual,
        }
    }
}

/// Sampling parameters shared by every randomized check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    /// Random unit vectors drawn in addition to the basis probes.
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Prepend the standard basis vectors to the random draws.
    pub probes: bool,
    /// Coordinates a shift sample may occupy, before the truncation margin.
    pub shift_support: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { samples: 200, seed: 0x5eed, tol: DEFAULT_TOL, probes: true, shift_support: 16 }
    }
}

/// Basis probes followed by Gaussian draws normalised in the operator norm.
///
/// For a shift, vectors only occupy the first `support` coordinates so an
/// orbit of `margin` steps never reaches the truncation boundary.
pub fn sample_vectors(op: &OperatorSpec, cfg: &SampleConfig, margin: usize) -> Result<Vec<Vector>> {
    let dim = op.dim();
    let support = match op {
        OperatorSpec::Dense(_) => dim,
        OperatorSpec::Shift(_) => cfg.shift_support.min(dim.saturating_sub(margin + 1)),
    };
    if support == 0 {
        return invalid(format!("truncation {dim} leaves no room for orbits of {margin} steps"));
    }
    let mut out = Vec::with_capacity(cfg.samples + support);
    if cfg.probes {
        for i in 0..support {
            let mut e = vec![Complex64::zero(); dim];
            e[i] = Complex64::one();
            out.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let complex = op.field() == Field::Complex;
    while out.len() < cfg.samples + if cfg.probes { support } else { 0 } {
        let mut v = vec![Complex64::zero(); dim];
        for z in v.iter_mut().take(support) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            *z = Complex64::new(re, im);
        }
        let n = op.norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|z| *z /= n);
            out.push(v);
        }
    }
    Ok(out)
}

/// Relative residual of `sum_k (-1)^k C(m,k) a_k^p` against its positive mass.
pub fn alternating_residual(norms: &[f64], m: usize, p: f64) -> f64 {
    let (mut signed, mut mass) = (0.0, 0.0);
    for (k, a) in norms.iter().take(m + 1).enumerate() {
        let t = binomial_f64(m as u64, k as u64) * a.powf(p);
        mass += t;
        signed += if k % 2 == 1 { -t } else { t };
    }
    if mass == 0.0 {
        0.0
    } else {
        signed.abs() / mass
    }
}

fn hilbert_applies(op: &OperatorSpec, p: f64) -> std::result::Result<&DenseMatrix, String> {
    match op {
        OperatorSpec::Dense(d) if d.norm == NormKind::P(2.0) && p == 2.0 => Ok(d),
        OperatorSpec::Dense(d) if d.norm != NormKind::P(2.0) => Err(format!("norm is {}, not l2", d.norm.label())),
        OperatorSpec::Dense(_) => Err(format!("exponent is {p}, not 2")),
        OperatorSpec::Shift(_) => Err("operator is a weighted shift, not a dense matrix".into()),
    }
}

fn shift_applies(op: &OperatorSpec, p: f64) -> std::result::Result<&WeightedShift, String> {
    match op {
        OperatorSpec::Shift(s) => match s.space {
            NormKind::P(q) if (q - p).abs() <= 1e-12 * q => Ok(s),
            NormKind::P(q) => Err(format!("exponent {p} differs from the space exponent {q}")),
            NormKind::Inf => Err("space is l_inf".into()),
        },
        OperatorSpec::Dense(_) => Err("operator is dense, not a weighted shift".into()),
    }
}

/// Decide whether `sum_k (-1)^k C(m,k) ||T^k x||^p = 0` for every `x`.
pub fn check_mp_isometry(
    op: &OperatorSpec,
    m: usize,
    p: f64,
    strategy: StrategyChoice,
    cfg: &SampleConfig,
) -> Result<Verdict> {
    if m == 0 {
        return invalid("order m must be at least 1");
    }
    if !(p > 0.0 && p.is_finite()) {
        return invalid(format!("exponent must be positive, got {p}"));
    }
    let incompatible = |strategy, reason| Error::IncompatibleStrategy { strategy, reason };
    match strategy {
        StrategyChoice::Hilbert => {
            hilbert_check(hilbert_applies(op, p).map_err(|r| incompatible("hilbert", r))?, m, cfg.tol)
        }
        StrategyChoice::Shift => {
            shift_check(shift_applies(op, p).map_err(|r| incompatible("shift", r))?, m, p, cfg.tol)
        }
        StrategyChoice::Sampled => sampled_check(op, m, p, cfg),
        StrategyChoice::Auto => {
            if let Ok(d) = hilbert_applies(op, p) {
                hilbert_check(d, m, cfg.tol)
            } else if let Ok(s) = shift_applies(op, p) {
                shift_check(s, m, p, cfg.tol)
            } else {
                sampled_check(op, m, p, cfg)
            }
        }
    }
}

/// Frobenius norm of `sum_k (-1)^k C(m,k) (T^k)^H T^k` and the scale
/// `sum_k C(m,k) ||T^k||_F^2`.
pub fn hilbert_residual(d: &DenseMatrix, m: usize) -> (f64, f64, DMatrix<Complex64>) {
    let dim = d.dim();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    let mut scale = 0.0;
    let mut power = DMatrix::<Complex64>::identity(dim, dim);
    for k in 0..=m {
        if k > 0 {
            power = &d.entries * &power;
        }
        let c = binomial_f64(m as u64, k as u64);
        let gram = power.adjoint() * &power;
        scale += c * power.norm_squared();
        let term = gram * Complex64::new(if k % 2 == 1 { -c } else { c }, 0.0);
        acc += term;
    }
    (acc.norm(), scale, acc)
}

fn hilbert_check(d: &DenseMatrix, m: usize, tol: f64) -> Result<Verdict> {
    let (residual, scale, acc) = hilbert_residual(d, m);
    let rel = if scale == 0.0 { residual } else { residual / scale };
    let status = if residual == 0.0 {
        VerdictStatus::HoldsExact
    } else if rel <= tol {
        VerdictStatus::HoldsWithinTolerance { checks: 1, max_relative_residual: rel }
    } else {
        let herm = (&acc + acc.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let idx = eig.eigenvalues.iamax();
        let vector: Vector = eig.eigenvectors.column(idx).iter().copied().collect();
        let op = OperatorSpec::Dense(d.clone());
        let witness_residual = alternating_residual(&op.orbit_norm_values(&vector, m + 1)?, m, 2.0);
        VerdictStatus::Fails { witness: Witness { vector, window: None }, residual: witness_residual }
    };
    Ok(Verdict { status, strategy: Strategy::HilbertExact, seed: None })
}

/// For a shift on `l_p`, `||T^n x||_p^p = sum_k |x_k|^p (w_{k+1} ... w_{k+n})^p`,
/// so the operator is an `(m,p)`-isometry iff every coefficient sequence
/// `n -> (w_{k+1} ... w_{k+n})^p` satisfies the alternating identity.
fn shift_check(s: &WeightedShift, m: usize, p: f64, tol: f64) -> Result<Verdict> {
    let n = s.truncation;
    if n <= m + 1 {
        return invalid(format!("truncation {n} too small for order {m}"));
    }
    let last_k = n - 1 - m;
    let unit = |k: usize| {
        let mut e = vec![Complex64::zero(); n];
        e[k] = Complex64::one();
        e
    };
    let exact: Option<Vec<BigRational>> = (0..n).map(|i| s.weights.weight_power_exact(i.max(1), p)).collect();
    if let Some(wp) = exact {
        let weights: Vec<BigRational> = (0..=m)
            .map(|j| {
                let c = BigRational::from_integer(BigInt::from(binomial(m as u64, j as u64)));
                if j % 2 == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect();
        for k in 0..=last_k {
            let mut prod = BigRational::one();
            let mut signed = weights[0].clone();
            let mut mass = weights[0].clone();
            for (j, w) in weights.iter().enumerate().skip(1) {
                prod *= &wp[k + j];
                signed += w * &prod;
                mass += w.abs() * &prod;
            }
            if !signed.is_zero() {
                let residual = (signed.abs() / mass).to_f64().unwrap_or(f64::INFINITY);
                return Ok(Verdict {
                    status: VerdictStatus::Fails { witness: Witness { vector: unit(k), window: None }, residual },
                    strategy: Strategy::ShiftCoefficient,
                    seed: None,
                });
            }
        }
        return Ok(Verdict { status: VerdictStatus::HoldsExact, strategy: Strategy::ShiftCoefficient, seed: None });
    }
    let wp: Vec<f64> = s.cached.iter().map(|w| w.powf(p)).collect();
    let mut max_rel: f64 = 0.0;
    for k in 0..=last_k {
        let mut prod = 1.0;
        let (mut signed, mut mass) = (1.0, 1.0);
        for j in 1..=m {
            prod *= wp[k + j];
            let t = binomial_f64(m as u64, j as u64) * prod;
            mass += t;
            signed += if j % 2 == 1 { -t } else { t };
        }
        let rel = signed.abs() / mass;
        if !(rel <= tol) {
            return Ok(Verdict {
                status: VerdictStatus::Fails { witness: Witness { vector: unit(k), window: None }, residual: rel },
                strategy: Strategy::ShiftCoefficient,
                seed: None,
            });
        }
        max_rel = max_rel.max(rel);
    }
    Ok(Verdict {
        status: VerdictStatus::HoldsWithinTolerance { checks: last_k + 1, max_relative_residual: max_rel },
        strategy: Strategy::ShiftCoefficient,
        seed: None,
    })
}

fn sampled_check(op: &OperatorSpec, m: usize, p: f64, cfg: &SampleConfig) -> Result<Verdict> {
    let vectors = sample_vectors(op, cfg, m)?;
    let mut max_rel: f64 = 0.0;
    for x in &vectors {
        let rel = alternating_residual(&op.orbit_norm_values(x, m + 1)?, m, p);
        if !(rel <= cfg.tol) {
            return Ok(Verdict {
                status: VerdictStatus::Fails { witness: Witness { vector: x.clone(), window: None }, residual: rel },
                strategy: Strategy::Sampled,
                seed: Some(cfg.seed),
            });
        }
        max_rel = max_rel.max(rel);
    }
    Ok(Verdict {
        status: VerdictStatus::HoldsSampled { samples: vectors.len(), max_relative_residual: max_rel },
        strategy: Strategy::Sampled,
        seed: Some(cfg.seed),
    })
}

/// Outcome of testing whether bounded orbits force an isometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundedOrbitReport {
    /// Every sampled orbit stays flat and `||Tx|| = ||x||` on every sample.
    IsometryConfirmed { samples: usize, max_deviation: f64 },
    /// Some orbit is not bounded on the horizon, so the statement says nothing.
    NotApplicable { witness: Vector, growth: f64 },
    /// Orbits are flat but `T` moves norms: contradicts the `(m,p)` premise.
    Inconsistent { witness: Vector, deviation: f64 },
}

/// Diagnostic for an operator already known to be an `(m,p)`-isometry:
/// bounded orbits must make it an isometry.
pub fn check_bounded_orbit_isometry(
    op: &OperatorSpec,
    horizon: usize,
    cfg: &SampleConfig,
) -> Result<BoundedOrbitReport> {
    let horizon = horizon.max(2);
    let vectors = sample_vectors(op, cfg, horizon)?;
    let mut max_dev: f64 = 0.0;
    for x in &vectors {
        let orbit = op.orbit_norm_values(x, horizon)?;
        let hi = orbit.iter().cloned().fold(0.0, f64::max);
        let lo = orbit.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(hi <= (1.0 + cfg.tol) * lo) {
            return Ok(BoundedOrbitReport::NotApplicable { witness: x.clone(), growth: hi / lo });
        }
        let dev = (orbit[1] - orbit[0]).abs() / orbit[0];
        if !(dev <= cfg.tol) {
            return Ok(BoundedOrbitReport::Inconsistent { witness: x.clone(), deviation: dev });
        }
        max_dev = max_dev.max(dev);
    }
    Ok(BoundedOrbitReport::IsometryConfirmed { samples: vectors.len(), max_deviation: max_dev })
}

/// Largest eigenvalue modulus of a dense operator.
pub fn spectral_radius(op: &OperatorSpec) -> Result<f64> {
    let d = op.as_dense().ok_or_else(|| Error::InvalidArgument("spectral radius needs a dense matrix".into()))?;
    Ok(eigenvalues(&d.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    // eigenvalues of [[a, b], [c, d]]
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let s = disc.sqrt();
    [half_tr + s, half_tr - s]
}

/// Eigenvalues in closed form for `d <= 2`, otherwise from a complex Schur form.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    match m.nrows() {
        1 => vec![m[(0, 0)]],
        2 => quadratic_roots(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec(),
        n => {
            let (_, t) = m.clone().schur().unpack();
            let mut out = Vec::with_capacity(n);
            let mut i = 0;
            while i < n {
                if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * (t[(i, i)].norm() + t[(i + 1, i + 1)].norm()).max(1e-300)
                {
                    out.extend(quadratic_roots(t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]));
                    i += 2;
                } else {
                    out.push(t[(i, i)]);
                    i += 1;
                }
            }
            out
        }
    }
}

/// How an operator norm `||T^k||` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// Column sums, row sums, largest singular value, or weight products.
    Exact,
    /// Largest ratio over the sample vectors; a lower bound.
    SampledLowerBound,
}

/// `||T^k||` in the operator's own norm.
pub fn power_norm(op: &OperatorSpec, k: usize, cfg: &SampleConfig) -> Result<(f64, NormMethod)> {
    match op {
        OperatorSpec::Shift(s) => {
            // T^k maps e_j to (w_{j+1}..w_{j+k}) e_{j+k}; on every l_p the norm is the largest product
            let n = s.truncation;
            let best =
                (0..n.saturating_sub(k)).map(|j| (1..=k).map(|i| s.cached[j + i]).product::<f64>()).fold(0.0, f64::max);
            Ok((if k == 0 { 1.0 } else { best }, NormMethod::Exact))
        }
        OperatorSpec::Dense(d) => {
            let pk = d.power(k);
            match d.norm {
                NormKind::P(1.0) => Ok((
                    (0..pk.ncols()).map(|j| pk.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
                    NormMethod::Exact,
                )),
                NormKind::Inf => Ok((
                    (0..pk.nrows()).map(|i| pk.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
                    NormMethod::Exact,
                )),
                NormKind::P(2.0) => {
                    let sv = pk.singular_values();
                    Ok((sv.iter().cloned().fold(0.0, f64::max), NormMethod::Exact))
                }
                NormKind::P(_) => {
                    let powered = OperatorSpec::Dense(DenseMatrix { entries: pk, ..d.clone() });
                    let mut best: f64 = 0.0;
                    for x in sample_vectors(&powered, cfg, 0)? {
                        best = best.max(powered.norm(&powered.apply_unchecked(&x)) / powered.norm(&x));
                    }
                    Ok((best, NormMethod::SampledLowerBound))
                }
            }
        }
    }
}

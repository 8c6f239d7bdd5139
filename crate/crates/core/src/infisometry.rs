//! `(m, inf)`-isometries: the parity-window condition on orbits, its
//! max-based reformulation, power bounds, and the renorming that turns such
//! an operator into an isometry.

use crate::error::{invalid, Error, Result};
use crate::numeric::rational_from_f64;
use crate::operators::{
    power_norm, sample_vectors, DenseMatrix, Field, NormMethod, OperatorSpec, SampleConfig, Strategy, Vector, Verdict,
    VerdictStatus, Witness,
};
use crate::sequences::PositiveSequencePrefix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// Sampling plus the orbit length; windows start at `0..=horizon - m`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MinfConfig {
    pub sampling: SampleConfig,
    /// Defaults to `8 m` when `None`.
    pub horizon: Option<usize>,
}

impl MinfConfig {
    pub fn horizon_for(&self, m: usize) -> usize {
        self.horizon.unwrap_or(8 * m)
    }
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, f64::max)
}

/// Relative gap between the even-index and odd-index maxima of the window
/// `a[l..=l+m]`, measured against the larger of the two.
pub fn window_gap(a: &[f64], m: usize, l: usize) -> f64 {
    let even = max_of((l..=l + m).filter(|k| k % 2 == 0).map(|k| a[k]));
    let odd = max_of((l..=l + m).filter(|k| k % 2 == 1).map(|k| a[k]));
    if even == odd {
        return 0.0;
    }
    (even - odd).abs() / even.max(odd)
}

/// Per-window view of the parity condition on one orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxParityProfile {
    pub m: usize,
    pub shift_verdicts: Vec<bool>,
    pub max_value: f64,
    /// Indices where `max_value` is attained.
    pub max_attained_window: Vec<usize>,
}

impl MaxParityProfile {
    pub fn holds(&self) -> bool {
        self.shift_verdicts.iter().all(|v| *v)
    }
}

pub fn parity_profile(a: &PositiveSequencePrefix, m: usize, tol: f64) -> Result<MaxParityProfile> {
    let v = a.values();
    if m == 0 || v.len() < m + 1 {
        return invalid(format!("order {m} needs an orbit of length >= {}", m + 1));
    }
    let shift_verdicts = (0..v.len() - m).map(|l| window_gap(v, m, l) <= tol).collect();
    let max_value = max_of(v.iter().copied());
    let max_attained_window = (0..v.len()).filter(|&k| v[k] == max_value).collect();
    Ok(MaxParityProfile { m, shift_verdicts, max_value, max_attained_window })
}

/// The parity-window condition on every window that fits in the prefix.
pub fn satisfies_parity_windows(a: &PositiveSequencePrefix, m: usize, tol: f64) -> bool {
    let v = a.values();
    m >= 1 && v.len() > m && (0..v.len() - m).all(|l| window_gap(v, m, l) <= tol)
}

/// Max characterization: the prefix maximum is reached, for every window
/// start `l`, among `k = l..=l+m-1` with the parity of `l+m-1`.
///
/// Window starts run over `0..=len-1-m`, the same range as the parity
/// condition, so both read the same indices.
pub fn check_max_characterization(a: &PositiveSequencePrefix, m: usize) -> bool {
    let v = a.values();
    if m == 0 || v.len() < m + 1 {
        return false;
    }
    let top = max_of(v.iter().copied());
    (0..v.len() - m).all(|l| {
        let parity = (l + m - 1) % 2;
        max_of((l..l + m).filter(|k| k % 2 == parity).map(|k| v[k])) == top
    })
}

/// Same as [`check_max_characterization`] but ignoring parity; necessary,
/// not sufficient.
pub fn windowed_max_without_parity(a: &PositiveSequencePrefix, m: usize) -> bool {
    let v = a.values();
    if m == 0 || v.len() < m + 1 {
        return false;
    }
    let top = max_of(v.iter().copied());
    (0..v.len() - m).all(|l| max_of(v[l..l + m].iter().copied()) == top)
}

/// Sampled check of the parity-window condition on the orbits of `op`.
pub fn check_minf_isometry(op: &OperatorSpec, m: usize, cfg: &MinfConfig) -> Result<Verdict> {
    if m == 0 {
        return invalid("order m must be at least 1");
    }
    let horizon = cfg.horizon_for(m);
    if horizon < m {
        return invalid(format!("horizon {horizon} shorter than the order {m}"));
    }
    let s = &cfg.sampling;
    let vectors = sample_vectors(op, s, horizon)?;
    let mut worst: f64 = 0.0;
    for x in &vectors {
        let a = op.orbit_norm_values(x, horizon + 1)?;
        for l in 0..=horizon - m {
            let gap = window_gap(&a, m, l);
            if !(gap <= s.tol) {
                return Ok(Verdict {
                    status: VerdictStatus::Fails {
                        witness: Witness { vector: x.clone(), window: Some(l) },
                        residual: gap,
                    },
                    strategy: Strategy::Sampled,
                    seed: Some(s.seed),
                });
            }
            worst = worst.max(gap);
        }
    }
    Ok(Verdict {
        status: VerdictStatus::HoldsSampled { samples: vectors.len(), max_relative_residual: worst },
        strategy: Strategy::Sampled,
        seed: Some(s.seed),
    })
}

/// Least `m <= m_max` at which the check holds, with the failing verdict one
/// order lower. `(m, inf)` implies `(m+1, inf)`, so this is the strict order.
pub fn strict_minf_order(
    op: &OperatorSpec,
    m_max: usize,
    cfg: &MinfConfig,
) -> Result<Option<(usize, Option<Verdict>)>> {
    let mut below = None;
    for m in 1..=m_max {
        let v = check_minf_isometry(op, m, cfg)?;
        if v.holds() {
            return Ok(Some((m, below)));
        }
        below = Some(v);
    }
    Ok(None)
}

/// `C = max_{k<m} ||T^k||`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBound {
    pub value: f64,
    pub method: NormMethod,
    pub power_norms: Vec<f64>,
}

pub fn power_bound(op: &OperatorSpec, m: usize, cfg: &SampleConfig) -> Result<PowerBound> {
    if m == 0 {
        return invalid("order m must be at least 1");
    }
    let mut method = NormMethod::Exact;
    let mut power_norms = Vec::with_capacity(m);
    for k in 0..m {
        let (n, how) = power_norm(op, k, cfg)?;
        if how == NormMethod::SampledLowerBound {
            method = how;
        }
        power_norms.push(n);
    }
    Ok(PowerBound { value: max_of(power_norms.iter().copied()), method, power_norms })
}

/// `|x| = max_{k<m} ||T^k x||`.
pub fn equivalent_norm(op: &OperatorSpec, m: usize, x: &[Complex64]) -> Result<f64> {
    if m == 0 {
        return invalid("order m must be at least 1");
    }
    Ok(max_of(op.orbit_norm_values(x, m)?.into_iter()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormReport {
    /// `|Tx| = |x|` on every sample.
    pub verdict: Verdict,
    pub power_bound: PowerBound,
    /// A sample violating `||x|| <= |x| <= C ||x||`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich_violation: Option<Vector>,
}

impl RenormReport {
    pub fn holds(&self) -> bool {
        self.verdict.holds() && self.sandwich_violation.is_none()
    }
}

/// Check that `T` is an isometry for the renormed `|.|`, and that `|.|` is
/// equivalent to the original norm with constants `1` and `C`.
pub fn check_renorm_isometry(op: &OperatorSpec, m: usize, cfg: &SampleConfig) -> Result<RenormReport> {
    let bound = power_bound(op, m, cfg)?;
    let vectors = sample_vectors(op, cfg, m + 1)?;
    let mut worst: f64 = 0.0;
    let mut failure = None;
    let mut sandwich_violation = None;
    for x in &vectors {
        let a = op.orbit_norm_values(x, m + 1)?;
        let at_x = max_of(a[..m].iter().copied());
        let at_tx = max_of(a[1..].iter().copied());
        let gap = if at_x == at_tx { 0.0 } else { (at_x - at_tx).abs() / at_x.max(at_tx) };
        if failure.is_none() && !(gap <= cfg.tol) {
            failure =
                Some(VerdictStatus::Fails { witness: Witness { vector: x.clone(), window: None }, residual: gap });
        }
        worst = worst.max(gap);
        let slack = cfg.tol * at_x;
        if sandwich_violation.is_none() && (a[0] > at_x + slack || at_x > bound.value * a[0] + slack) {
            sandwich_violation = Some(x.clone());
        }
    }
    let status =
        failure.unwrap_or(VerdictStatus::HoldsSampled { samples: vectors.len(), max_relative_residual: worst });
    Ok(RenormReport {
        verdict: Verdict { status, strategy: Strategy::Sampled, seed: Some(cfg.seed) },
        power_bound: bound,
        sandwich_violation,
    })
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Sufficient condition: `||T^m x|| = ||T^{m-1} x||` and `||T^m x||` dominates
/// `||T^k x||` for `k <= m-2`. For `m = 2` it is also necessary.
pub fn construct1_check(op: &OperatorSpec, m: usize, cfg: &SampleConfig) -> Result<Verdict> {
    if m < 2 {
        return invalid("the condition needs m >= 2");
    }
    let vectors = sample_vectors(op, cfg, m)?;
    let mut worst: f64 = 0.0;
    for x in &vectors {
        let a = op.orbit_norm_values(x, m + 1)?;
        let top = a[m];
        let mut gap = rel_gap(top, a[m - 1]);
        for &ak in &a[..m - 1] {
            if ak > top {
                gap = gap.max((ak - top) / ak);
            }
        }
        if !(gap <= cfg.tol) {
            return Ok(Verdict {
                status: VerdictStatus::Fails { witness: Witness { vector: x.clone(), window: None }, residual: gap },
                strategy: Strategy::Sampled,
                seed: Some(cfg.seed),
            });
        }
        worst = worst.max(gap);
    }
    Ok(Verdict {
        status: VerdictStatus::HoldsSampled { samples: vectors.len(), max_relative_residual: worst },
        strategy: Strategy::Sampled,
        seed: Some(cfg.seed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Construct2Report {
    pub n: usize,
    pub m: usize,
    /// `||T^n x|| = ||x||` on samples.
    pub power_isometry: Verdict,
    /// Direct parity-window check at order `m`, run only when `T^n` is an isometry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minf: Option<Verdict>,
}

impl Construct2Report {
    pub fn certified(&self) -> bool {
        self.power_isometry.holds() && self.minf.as_ref().is_some_and(Verdict::holds)
    }
}

/// If `T^n` is an isometry for an odd `n`, then `T` is an `(m, inf)`-isometry
/// for every `m >= 2n - 1`. Even `n` is refused: the implication fails there.
pub fn construct2_check(op: &OperatorSpec, n: usize, m: usize, cfg: &MinfConfig) -> Result<Construct2Report> {
    if n == 0 || n.is_multiple_of(2) {
        return invalid(format!("the power must be odd; n = {n} does not force the parity condition"));
    }
    if m < 2 * n - 1 {
        return invalid(format!("order must be at least 2n - 1 = {}, got {m}", 2 * n - 1));
    }
    let s = &cfg.sampling;
    let vectors = sample_vectors(op, s, n)?;
    let mut worst: f64 = 0.0;
    let mut status = None;
    for x in &vectors {
        let a = op.orbit_norm_values(x, n + 1)?;
        let gap = rel_gap(a[n], a[0]);
        if !(gap <= s.tol) {
            status = Some(VerdictStatus::Fails { witness: Witness { vector: x.clone(), window: None }, residual: gap });
            break;
        }
        worst = worst.max(gap);
    }
    let power_isometry = Verdict {
        status: status.unwrap_or(VerdictStatus::HoldsSampled { samples: vectors.len(), max_relative_residual: worst }),
        strategy: Strategy::Sampled,
        seed: Some(s.seed),
    };
    let minf = if power_isometry.holds() { Some(check_minf_isometry(op, m, cfg)?) } else { None };
    if power_isometry.holds() && !minf.as_ref().is_some_and(Verdict::holds) {
        return Err(Error::Inconsistency(format!("T^{n} is an isometry yet the ({m},inf) check fails")));
    }
    Ok(Construct2Report { n, m, power_isometry, minf })
}

/// Inverse of a dense matrix; exact rational elimination for real `d <= 4`.
pub fn inverse(d: &DenseMatrix) -> Result<DenseMatrix> {
    let n = d.dim();
    let entries = if d.field() == Field::Real && n <= 4 {
        exact_real_inverse(d.entries())?
    } else {
        d.entries().clone().try_inverse().ok_or(Error::Singular)?
    };
    DenseMatrix::new(d.field(), entries, d.norm_kind())
}

fn exact_real_inverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = m.nrows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        rational_from_f64(m[(i, j)].re).ok_or_else(|| Error::InvalidArgument("non-finite entry".into()))
                    } else {
                        Ok(BigRational::from_integer(((j - n == i) as i32).into()))
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Singular)?;
        a.swap(col, pivot);
        let inv = BigRational::from_integer(1.into()) / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| Complex64::new(a[i][n + j].to_f64().unwrap_or(f64::NAN), 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseReport {
    pub inverse_verdict: Verdict,
    /// For even `m`, the operator itself is checked at order `m - 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent: Option<Verdict>,
}

/// The inverse of an invertible `(m, inf)`-isometry is one too; for even `m`
/// the operator is in fact an `(m-1, inf)`-isometry.
pub fn check_minf_inverse(op: &OperatorSpec, m: usize, cfg: &MinfConfig) -> Result<InverseReport> {
    let d = op.as_dense().ok_or_else(|| Error::InvalidArgument("inverse check needs a dense matrix".into()))?;
    let inv = OperatorSpec::Dense(inverse(d)?);
    let inverse_verdict = check_minf_isometry(&inv, m, cfg)?;
    let descent = if m.is_multiple_of(2) && m > 1 { Some(check_minf_isometry(op, m - 1, cfg)?) } else { None };
    Ok(InverseReport { inverse_verdict, descent })
}

//! Strict pairs of an operator: compatibility arithmetic between pairs,
//! discovery of the anchoring pair `(m0, p0)`, and the partition of sample
//! vectors by the order their own orbit needs.

use crate::error::{invalid, Error, Result};
use crate::numeric::approximate_rational;
use crate::operators::{
    check_mp_isometry, sample_vectors, NormKind, OperatorSpec, SampleConfig, Strategy, StrategyChoice, Vector, Verdict,
};
use crate::sequences::{admissible_exponents, is_in_a_mp, PositiveSequencePrefix, RhoClassification, RhoSearch};
use num_integer::Integer;
use serde::Serialize;

/// The only exponent a strict `(mu, q)`-isometry can have when the operator
/// is also a strict `(m, p)`-isometry: `(m-1) q = (mu-1) p`.
pub fn pair_compatibility(m: usize, p: f64, mu: usize) -> Result<f64> {
    if m == 0 || mu == 0 {
        return invalid("orders must be at least 1");
    }
    if !(p > 0.0) {
        return invalid("exponent must be positive");
    }
    match (m == 1, mu == 1) {
        (true, true) => Ok(p),
        (false, false) => Ok((mu - 1) as f64 * p / (m - 1) as f64),
        _ => invalid(format!("order 1 pairs only with order 1 (got m = {m}, mu = {mu})")),
    }
}

/// Strict pair implied by two compatible strict pairs:
/// `(d+1, d p/(m-1))` with `d = gcd(m-1, mu-1)`.
pub fn intersect_strict(m: usize, p: f64, mu: usize, q: f64) -> Result<(usize, f64)> {
    if m < 2 || mu < 2 {
        return invalid("intersection needs orders of at least 2");
    }
    let lhs = (m - 1) as f64 * q;
    let rhs = (mu - 1) as f64 * p;
    if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
        return Err(Error::IncompatiblePairs { m, p, mu, q });
    }
    let d = (m - 1).gcd(&(mu - 1));
    Ok((d + 1, d as f64 * p / (m - 1) as f64))
}

/// Strict pairs `(k(m0-1)+1, k p0)`, or the isometry case `{1} x (0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictPairLattice {
    pub m0: usize,
    pub p0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0_rational: Option<(i64, u64)>,
    pub special: bool,
}

impl StrictPairLattice {
    pub fn new(m0: usize, p0: f64) -> Result<Self> {
        if m0 < 2 || !(p0 > 0.0 && p0.is_finite()) {
            return invalid(format!("lattice anchor needs m0 >= 2 and p0 > 0, got ({m0}, {p0})"));
        }
        Ok(Self { m0, p0, p0_rational: approximate_rational(p0, 16, 1e-6), special: false })
    }

    /// Isometries; `p` only picks the representative pair.
    pub fn isometry(p: f64) -> Self {
        Self { m0: 1, p0: p, p0_rational: approximate_rational(p, 16, 1e-6), special: true }
    }

    pub fn from_rho(rho: &RhoClassification) -> Option<Self> {
        match *rho {
            RhoClassification::Lattice { m0, p0, .. } => Self::new(m0, p0).ok(),
            RhoClassification::ConstantAll => Some(Self::isometry(1.0)),
            _ => None,
        }
    }

    pub fn contains(&self, mu: usize, q: f64) -> bool {
        if self.special {
            return mu == 1;
        }
        if mu < 2 || !(mu - 1).is_multiple_of(self.m0 - 1) {
            return false;
        }
        let k = ((mu - 1) / (self.m0 - 1)) as f64;
        (k * self.p0 - q).abs() <= 1e-12 * q.abs().max(k * self.p0)
    }
}

pub fn lattice_pairs(lat: &StrictPairLattice, k_max: usize) -> Vec<(usize, f64)> {
    if lat.special {
        return vec![(1, lat.p0)];
    }
    (1..=k_max).map(|k| (k * (lat.m0 - 1) + 1, k as f64 * lat.p0)).collect()
}

/// Budget and checking policy for [`find_minimal_pair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSearch {
    pub m_max: usize,
    pub roots: RhoSearch,
    pub strategy: StrategyChoice,
    pub sampling: SampleConfig,
}

impl Default for PairSearch {
    fn default() -> Self {
        Self {
            m_max: 8,
            roots: RhoSearch::default(),
            strategy: StrategyChoice::Auto,
            sampling: SampleConfig::default(),
        }
    }
}

/// One order of the scan: exponents suggested by a generic orbit and the
/// outcome of checking them on the whole operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanStep {
    pub m: usize,
    pub candidates: Vec<f64>,
    pub accepted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum PairOutcome {
    Isometry {
        verdict: Verdict,
    },
    Lattice {
        lattice: StrictPairLattice,
        verdict: Verdict,
        /// Sampled re-check of the anchor when `verdict` came from an exact strategy.
        #[serde(skip_serializing_if = "Option::is_none")]
        cross_check: Option<Verdict>,
        /// Failing check one order below the anchor.
        strictness: Verdict,
        scan: Vec<ScanStep>,
    },
    NotFound {
        scan: Vec<ScanStep>,
    },
}

impl PairOutcome {
    pub fn lattice(&self) -> Option<StrictPairLattice> {
        match self {
            PairOutcome::Isometry { .. } => Some(StrictPairLattice::isometry(1.0)),
            PairOutcome::Lattice { lattice, .. } => Some(*lattice),
            PairOutcome::NotFound { .. } => None,
        }
    }
}

fn reference_exponent(op: &OperatorSpec) -> f64 {
    match op.norm_kind() {
        NormKind::P(p) => p,
        NormKind::Inf => 1.0,
    }
}

/// Check `(m,p)` with the requested strategy and, when that was exact,
/// repeat it by sampling. The two must agree.
fn verified(op: &OperatorSpec, m: usize, p: f64, search: &PairSearch) -> Result<(Verdict, Option<Verdict>)> {
    let v = match check_mp_isometry(op, m, p, search.strategy, &search.sampling) {
        Err(Error::IncompatibleStrategy { .. }) => {
            check_mp_isometry(op, m, p, StrategyChoice::Sampled, &search.sampling)?
        }
        other => other?,
    };
    if v.strategy == Strategy::Sampled {
        return Ok((v, None));
    }
    let s = check_mp_isometry(op, m, p, StrategyChoice::Sampled, &search.sampling)?;
    if s.holds() != v.holds() {
        return Err(Error::Inconsistency(format!(
            "({m},{p}) check: {} strategy says {}, sampling says {}",
            v.strategy.name(),
            if v.holds() { "holds" } else { "fails" },
            if s.holds() { "holds" } else { "fails" }
        )));
    }
    Ok((v, Some(s)))
}

/// Find the least order `m0` at which `op` is an `(m0, p)`-isometry for
/// some `p`, confirm strictness, and return the lattice it anchors.
///
/// Candidate exponents come from the orbit of one generic sample vector;
/// each is then checked on the operator itself.
pub fn find_minimal_pair(op: &OperatorSpec, search: &PairSearch) -> Result<PairOutcome> {
    if search.m_max < 2 {
        return invalid("m_max must be at least 2");
    }
    let (iso, _) = verified(op, 1, reference_exponent(op), search)?;
    if iso.holds() {
        return Ok(PairOutcome::Isometry { verdict: iso });
    }
    let horizon = 2 * search.m_max + 4;
    let generic_cfg = SampleConfig { samples: 1, probes: false, ..search.sampling };
    let x = sample_vectors(op, &generic_cfg, horizon)?.remove(0);
    let orbit = PositiveSequencePrefix::new(op.orbit_norm_values(&x, horizon)?)?;
    let roots = RhoSearch { m_max: search.m_max, ..search.roots };

    let mut scan = Vec::new();
    for m in 2..=search.m_max {
        let mut candidates = admissible_exponents(&orbit, m, &roots)?;
        candidates.sort_by(|a, b| a.1.max_residual.total_cmp(&b.1.max_residual));
        let mut step = ScanStep { m, candidates: candidates.iter().map(|c| c.0).collect(), accepted: None };
        for (p, _) in candidates {
            let (verdict, cross_check) = verified(op, m, p, search)?;
            if !verdict.holds() {
                continue;
            }
            let strictness = if m == 2 { iso.clone() } else { verified(op, m - 1, p, search)?.0 };
            if strictness.holds() {
                continue;
            }
            step.accepted = Some(p);
            scan.push(step);
            return Ok(PairOutcome::Lattice {
                lattice: StrictPairLattice::new(m, p)?,
                verdict,
                cross_check,
                strictness,
                scan,
            });
        }
        scan.push(step);
    }
    Ok(PairOutcome::NotFound { scan })
}

/// Samples sharing the same minimal order `nu`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionLevel {
    pub nu: usize,
    pub count: usize,
    #[serde(skip)]
    pub sample_indices: Vec<usize>,
    #[serde(skip)]
    pub representatives: Vec<Vector>,
}

/// Samples grouped by the least `nu` with `||T^n x||^p` of degree `< nu`
/// on the horizon. Only levels that some sample reaches are listed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrictnessPartition {
    pub p: f64,
    pub horizon: usize,
    pub levels: Vec<PartitionLevel>,
    /// Level of each sample, in sampling order.
    #[serde(skip)]
    pub assignment: Vec<usize>,
    /// Samples whose residual one order lower was within `1e3 * tol`.
    pub near_cliff: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl StrictnessPartition {
    pub fn nus(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.nu).collect()
    }
}

const REPRESENTATIVES: usize = 3;

/// Assign every sample vector (basis probes first) its least order.
pub fn partition_samples(
    op: &OperatorSpec,
    max_order: usize,
    p: f64,
    cfg: &SampleConfig,
    horizon: usize,
) -> Result<StrictnessPartition> {
    if max_order == 0 {
        return invalid("max_order must be at least 1");
    }
    if horizon < max_order + 2 {
        return invalid(format!("horizon {horizon} too short for order {max_order}"));
    }
    let vectors = sample_vectors(op, cfg, horizon)?;
    let mut assignment = Vec::with_capacity(vectors.len());
    let mut near_cliff = Vec::new();
    for (i, x) in vectors.iter().enumerate() {
        let orbit = PositiveSequencePrefix::new(op.orbit_norm_values(x, horizon)?)?;
        let mut prev_residual = f64::INFINITY;
        let mut level = None;
        for nu in 1..=max_order {
            let v = is_in_a_mp(&orbit, nu, p, cfg.tol)?;
            if v.is_member() {
                level = Some(nu);
                break;
            }
            prev_residual = v.max_residual;
        }
        let nu = level.ok_or_else(|| {
            Error::Inconsistency(format!("sample {i} needs an order above {max_order} at p = {p}; check the tolerance"))
        })?;
        if nu > 1 && prev_residual <= 1e3 * cfg.tol {
            near_cliff.push(i);
        }
        assignment.push(nu);
    }
    let mut levels: Vec<PartitionLevel> = Vec::new();
    for (i, &nu) in assignment.iter().enumerate() {
        let pos = match levels.iter().position(|l| l.nu == nu) {
            Some(pos) => pos,
            None => {
                levels.push(PartitionLevel { nu, count: 0, sample_indices: Vec::new(), representatives: Vec::new() });
                levels.len() - 1
            }
        };
        let level = &mut levels[pos];
        level.count += 1;
        level.sample_indices.push(i);
        if level.representatives.len() < REPRESENTATIVES {
            level.representatives.push(vectors[i].clone());
        }
    }
    levels.sort_by_key(|l| l.nu);
    Ok(StrictnessPartition { p, horizon, levels, assignment, near_cliff, samples: vectors.len(), seed: cfg.seed })
}

/// First sample whose level at `q` is not the image of its level at `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionMismatch {
    pub sample: usize,
    pub nu_p: usize,
    pub nu_q: usize,
    pub expected: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub p: f64,
    pub q: f64,
    /// `(nu at p, nu at q)` for every level.
    pub mapping: Vec<(usize, Option<usize>)>,
    pub mismatch: Option<PartitionMismatch>,
}

impl IndependenceReport {
    pub fn holds(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Level `nu` at exponent `p` becomes `1 + (nu-1) q / p` at exponent `q`;
/// it must be an integer and membership must be unchanged.
pub fn mapped_level(nu: usize, p: f64, q: f64) -> Option<usize> {
    let lambda = 1.0 + (nu - 1) as f64 * q / p;
    let r = lambda.round();
    ((lambda - r).abs() <= 1e-9 * lambda).then_some(r as usize)
}

pub fn check_partition_independence(
    at_p: &StrictnessPartition,
    at_q: &StrictnessPartition,
) -> Result<IndependenceReport> {
    if at_p.assignment.len() != at_q.assignment.len() || at_p.seed != at_q.seed {
        return invalid("partitions must come from the same sample set");
    }
    let (p, q) = (at_p.p, at_q.p);
    let mapping = at_p.levels.iter().map(|l| (l.nu, mapped_level(l.nu, p, q))).collect();
    let mismatch = at_p.assignment.iter().zip(&at_q.assignment).enumerate().find_map(|(i, (&a, &b))| {
        let expected = mapped_level(a, p, q);
        (expected != Some(b)).then_some(PartitionMismatch { sample: i, nu_p: a, nu_q: b, expected })
    });
    Ok(IndependenceReport { p, q, mapping, mismatch })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MinimalityVerdict {
    /// The nontrivial `nu - 1` share no prime factor, so `order` is the least
    /// strict order and every other one is `1 + k (order - 1)`.
    Certified {
        order: usize,
        terms: Vec<usize>,
    },
    NotApplicable {
        reason: String,
    },
}

pub fn coprime_minimality_check(part: &StrictnessPartition) -> MinimalityVerdict {
    let terms: Vec<usize> = part.levels.iter().filter(|l| l.nu > 1).map(|l| l.nu - 1).collect();
    if terms.len() < 2 {
        return MinimalityVerdict::NotApplicable {
            reason: format!("needs at least two observed levels above 1, found {}", terms.len()),
        };
    }
    let g = terms.iter().fold(0usize, |acc, t| acc.gcd(t));
    if g != 1 {
        return MinimalityVerdict::NotApplicable { reason: format!("levels share the factor {g}") };
    }
    let order = part.levels.last().map(|l| l.nu).unwrap_or(1);
    MinimalityVerdict::Certified { order, terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::jordan;
    use crate::operators::{make_bayart_shift, DenseMatrix};
    use num_complex::Complex64;

    #[test]
    fn pair_arithmetic() {
        assert_eq!(pair_compatibility(3, 2.0, 5).unwrap(), 4.0);
        assert_eq!(pair_compatibility(3, 2.0, 3).unwrap(), 2.0);
        assert_eq!(pair_compatibility(5, 4.0, 9).unwrap(), 8.0);
        assert_eq!(pair_compatibility(1, 3.0, 1).unwrap(), 3.0);
        assert!(pair_compatibility(1, 2.0, 3).is_err());
        assert_eq!(intersect_strict(3, 2.0, 5, 4.0).unwrap(), (3, 2.0));
        assert_eq!(intersect_strict(5, 4.0, 7, 6.0).unwrap(), (3, 2.0));
        assert_eq!(intersect_strict(4, 1.5, 4, 1.5).unwrap(), (4, 1.5));
        assert!(matches!(intersect_strict(3, 2.0, 5, 3.0), Err(Error::IncompatiblePairs { .. })));
    }

    #[test]
    fn lattice_listing() {
        let lat = StrictPairLattice::new(3, 2.0).unwrap();
        assert_eq!(lattice_pairs(&lat, 4), vec![(3, 2.0), (5, 4.0), (7, 6.0), (9, 8.0)]);
        let lat = StrictPairLattice::new(2, 1.5).unwrap();
        assert_eq!(lattice_pairs(&lat, 3), vec![(2, 1.5), (3, 3.0), (4, 4.5)]);
        assert_eq!(lattice_pairs(&StrictPairLattice::isometry(2.0), 5), vec![(1, 2.0)]);
        assert!(lat.contains(4, 4.5) && !lat.contains(4, 4.0));
        assert_eq!(lat.p0_rational, Some((3, 2)));
    }

    #[test]
    fn minimal_pairs() {
        let search = PairSearch::default();
        match find_minimal_pair(&jordan(), &search).unwrap() {
            PairOutcome::Lattice { lattice, verdict, .. } => {
                assert_eq!((lattice.m0, lattice.p0), (3, 2.0));
                assert_eq!(verdict.strategy, Strategy::HilbertExact);
            }
            other => panic!("{other:?}"),
        }
        let shift = make_bayart_shift(2.0, 2.0, NormKind::l2(), 256).unwrap();
        let lat = find_minimal_pair(&shift, &search).unwrap().lattice().unwrap();
        assert_eq!((lat.m0, lat.p0), (2, 2.0));
        let (s, c) = (0.6f64, 0.8f64);
        let rot = OperatorSpec::Dense(DenseMatrix::real(&[&[c, -s], &[s, c]], NormKind::l2()).unwrap());
        assert!(matches!(find_minimal_pair(&rot, &search).unwrap(), PairOutcome::Isometry { .. }));
        let grow = OperatorSpec::Dense(DenseMatrix::real(&[&[2.0, 0.0], &[0.0, 1.0]], NormKind::l1()).unwrap());
        assert!(matches!(find_minimal_pair(&grow, &search).unwrap(), PairOutcome::NotFound { .. }));
    }

    #[test]
    fn jordan_partition() {
        let cfg = SampleConfig { samples: 500, ..SampleConfig::default() };
        let part = partition_samples(&jordan(), 3, 2.0, &cfg, 16).unwrap();
        assert_eq!(part.nus(), vec![1, 3]);
        assert_eq!(part.assignment[0], 1);
        assert_eq!(part.assignment[1], 3);
        let part4 = partition_samples(&jordan(), 5, 4.0, &cfg, 16).unwrap();
        assert_eq!(part4.nus(), vec![1, 5]);
        let rep = check_partition_independence(&part, &part4).unwrap();
        assert!(rep.holds(), "{rep:?}");
        let mut corrupt = part4.clone();
        corrupt.assignment[1] = 4;
        assert_eq!(check_partition_independence(&part, &corrupt).unwrap().mismatch.unwrap().sample, 1);
        assert!(partition_samples(&jordan(), 2, 2.0, &cfg, 16).is_err());
    }

    #[test]
    fn shift_partition() {
        let shift = make_bayart_shift(2.0, 2.0, NormKind::l2(), 256).unwrap();
        let cfg = SampleConfig { samples: 50, ..SampleConfig::default() };
        let part = partition_samples(&shift, 2, 2.0, &cfg, 20).unwrap();
        assert_eq!(part.nus(), vec![2]);
        let mut e0 = vec![Complex64::new(0.0, 0.0); 256];
        e0[0] = Complex64::new(1.0, 0.0);
        let a = shift.orbit_norm_values(&e0, 6).unwrap();
        for (n, v) in a.iter().enumerate() {
            assert!((v * v - (1.0 + 0.75 * n as f64)).abs() < 1e-12 * (1.0 + 0.75 * n as f64));
        }
    }

    #[test]
    fn minimality() {
        let level = |nu| PartitionLevel { nu, count: 1, sample_indices: vec![], representatives: vec![] };
        let part = |nus: &[usize]| StrictnessPartition {
            p: 1.0,
            horizon: 10,
            levels: nus.iter().map(|&n| level(n)).collect(),
            assignment: vec![],
            near_cliff: vec![],
            samples: 0,
            seed: 0,
        };
        assert!(matches!(coprime_minimality_check(&part(&[3, 4])), MinimalityVerdict::Certified { order: 4, .. }));
        assert!(matches!(coprime_minimality_check(&part(&[1, 3])), MinimalityVerdict::NotApplicable { .. }));
        assert!(matches!(coprime_minimality_check(&part(&[3, 5])), MinimalityVerdict::NotApplicable { .. }));
    }
}

//! Identity residuals, state-by-state adjudication against the oracle, and
//! deterministic parameter sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{Probability, Rational};
use crate::closed_form::{
    chain2d_barrier_prob, chain2d_identity_terms, chain2d_point_prob, chain_absorbed_cdf,
    chain_identity_terms, chain_position_prob, check_quadrant_probs, gosper_terms,
    simple1d_point_prob, simple1d_total, walk2d_distribution, walk2d_identity_total,
    walk2d_state_prob, ChainEvaluator, CoefficientMode, GosperParams,
};
use crate::error::{Error, Result};
use crate::model::{BarrierSpec, ChainSpec, LatticePoint, MoveRule, Walk2DSpec};
use crate::oracle::{chain_snapshots, gosper_race_snapshot, walk2d_snapshot, Snapshot, StateLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityId {
    Eq1Chain,
    Eq2TwoNode,
    ThreeNode,
    MultiLevel(u32),
    Eq3Walk2D,
    Eq4Simple1D,
    Eq5Barrier2D,
    Gosper,
}

impl IdentityId {
    /// Tower height for the chain identities.
    pub fn levels(self) -> Option<u32> {
        match self {
            IdentityId::Eq1Chain => Some(1),
            IdentityId::Eq2TwoNode => Some(2),
            IdentityId::ThreeNode => Some(3),
            IdentityId::MultiLevel(l) => Some(l),
            _ => None,
        }
    }

    /// Whether the identity ships both coefficient modes.
    pub fn has_modes(self) -> bool {
        matches!(self, IdentityId::Eq3Walk2D | IdentityId::Eq5Barrier2D)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdentityId::Eq1Chain => write!(f, "eq1"),
            IdentityId::Eq2TwoNode => write!(f, "eq2"),
            IdentityId::ThreeNode => write!(f, "three-node"),
            IdentityId::MultiLevel(l) => write!(f, "multilevel-{l}"),
            IdentityId::Eq3Walk2D => write!(f, "eq3"),
            IdentityId::Eq4Simple1D => write!(f, "eq4"),
            IdentityId::Eq5Barrier2D => write!(f, "eq5"),
            IdentityId::Gosper => write!(f, "gosper"),
        }
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "eq1" => IdentityId::Eq1Chain,
            "eq2" => IdentityId::Eq2TwoNode,
            "three-node" | "three" => IdentityId::ThreeNode,
            "eq3" => IdentityId::Eq3Walk2D,
            "eq4" => IdentityId::Eq4Simple1D,
            "eq5" => IdentityId::Eq5Barrier2D,
            "gosper" => IdentityId::Gosper,
            other => {
                let levels = other
                    .strip_prefix("multilevel-")
                    .and_then(|l| l.parse::<u32>().ok())
                    .filter(|&l| l >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown identity {other:?}")))?;
                IdentityId::MultiLevel(levels)
            }
        })
    }
}

impl Serialize for IdentityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Inputs for one identity instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum IdentityParams {
    Chain {
        spec: ChainSpec,
        m: u32,
    },
    Walk2d {
        spec: Walk2DSpec,
        m: u32,
    },
    Simple1d {
        p: Probability,
        m: u32,
    },
    Barrier2d {
        barrier: BarrierSpec,
        probs: [Probability; 4],
        m: u32,
    },
    Gosper {
        p: Probability,
        n: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleDiff {
    pub label: StateLabel,
    pub closed_form: Rational,
    pub oracle: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub identity: IdentityId,
    pub params: IdentityParams,
    pub mode: CoefficientMode,
    pub total: Rational,
    pub residual: Rational,
    pub holds: bool,
    /// For chain identities: whether the stated `k` range gives the same
    /// first summand as the full range `[1, N - 1]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_independent: Option<bool>,
    pub oracle_diffs: Vec<OracleDiff>,
}

impl IdentityReport {
    pub fn matches_oracle(&self) -> bool {
        self.oracle_diffs.is_empty()
    }
}

fn report(
    identity: IdentityId,
    params: &IdentityParams,
    mode: CoefficientMode,
    total: Rational,
    closed: BTreeMap<StateLabel, Rational>,
    oracle: &BTreeMap<StateLabel, Rational>,
) -> IdentityReport {
    let residual = total.complement();
    let labels: BTreeSet<&StateLabel> = closed.keys().chain(oracle.keys()).collect();
    let zero = Rational::zero();
    let oracle_diffs = labels
        .into_iter()
        .filter_map(|label| {
            let c = closed.get(label).unwrap_or(&zero);
            let o = oracle.get(label).unwrap_or(&zero);
            (c != o).then(|| OracleDiff {
                label: *label,
                closed_form: c.clone(),
                oracle: o.clone(),
            })
        })
        .collect();
    IdentityReport {
        identity,
        params: params.clone(),
        mode,
        holds: residual.is_zero(),
        total,
        residual,
        range_independent: None,
        oracle_diffs,
    }
}

fn mismatch(identity: IdentityId, why: &str) -> Error {
    Error::ParamMismatch(format!("{identity}: {why}"))
}

fn check_chain(
    identity: IdentityId,
    params: &IdentityParams,
    spec: &ChainSpec,
    m: u32,
    mode: CoefficientMode,
    snapshot: &Snapshot,
) -> Result<IdentityReport> {
    let evaluator = ChainEvaluator::new(spec)?;
    let (a, b) = chain_identity_terms(spec, m)?;
    let (a_all, _) = evaluator.identity_terms_all_k(m);

    let mut closed = BTreeMap::new();
    for k in 1..spec.n_states {
        for level in 1..=spec.levels {
            let value = if spec.levels == 1 {
                chain_position_prob(spec, k, m)?
            } else {
                evaluator.level_prob(k, level, m)?
            };
            if !value.is_zero() {
                closed.insert(StateLabel::Tower { position: k, level }, value);
            }
        }
    }
    let absorbed = if spec.levels == 1 {
        chain_absorbed_cdf(spec, m)?
    } else {
        evaluator.absorbed_cdf(m)
    };
    if !absorbed.is_zero() {
        closed.insert(StateLabel::Terminal, absorbed);
    }
    let range_independent = a == a_all;
    let mut rep = report(identity, params, mode, a + b, closed, &snapshot.mass);
    rep.range_independent = Some(range_independent);
    Ok(rep)
}

fn chain_identity_for(identity: IdentityId, spec: &ChainSpec) -> Result<()> {
    let levels = identity.levels().expect("chain identity");
    if spec.levels != levels {
        return Err(mismatch(
            identity,
            &format!("expected {levels} levels, got {}", spec.levels),
        ));
    }
    Ok(())
}

fn lattice_label(point: LatticePoint) -> StateLabel {
    StateLabel::Lattice {
        point,
        pending: None,
    }
}

fn check_walk2d(
    params: &IdentityParams,
    spec: &Walk2DSpec,
    m: u32,
    mode: CoefficientMode,
) -> Result<IdentityReport> {
    let identity = IdentityId::Eq3Walk2D;
    if spec.barrier.is_some() {
        return Err(mismatch(identity, "walk must not have a barrier"));
    }
    let total = walk2d_identity_total(spec, m, mode)?;
    let snapshot = walk2d_snapshot(spec, m)?;
    let distribution = walk2d_distribution(spec, m, mode)?;
    let (closed, oracle) = match mode {
        CoefficientMode::Literal => {
            let closed = distribution
                .into_iter()
                .map(|(pt, q)| (lattice_label(pt), q))
                .collect();
            let oracle = snapshot
                .point_marginals()
                .into_iter()
                .map(|(pt, q)| (lattice_label(pt), q))
                .collect();
            (closed, oracle)
        }
        CoefficientMode::Corrected => {
            let points: BTreeSet<LatticePoint> = distribution
                .keys()
                .copied()
                .chain(snapshot.point_marginals().into_keys())
                .collect();
            let mut closed = BTreeMap::new();
            for pt in points {
                let pendings = std::iter::once(None).chain(
                    spec.moves
                        .iter()
                        .enumerate()
                        .filter(|(_, mv)| mv.duration > 1)
                        .map(|(i, _)| Some(i)),
                );
                for pending in pendings {
                    let q = walk2d_state_prob(spec, pt, pending, m)?;
                    if !q.is_zero() {
                        closed.insert(StateLabel::Lattice { point: pt, pending }, q);
                    }
                }
            }
            (closed, snapshot.mass)
        }
    };
    Ok(report(identity, params, mode, total, closed, &oracle))
}

/// The ±1 walk as a lattice model: right with `p`, left with `1 - p`.
fn simple1d_walk(p: &Probability) -> Walk2DSpec {
    Walk2DSpec::new(
        vec![
            MoveRule::new(1, 0, 1, p.clone()),
            MoveRule::new(-1, 0, 1, p.complement()),
        ],
        None,
    )
    .expect("two complementary moves")
}

fn check_simple1d(
    params: &IdentityParams,
    p: &Probability,
    m: u32,
    mode: CoefficientMode,
) -> Result<IdentityReport> {
    let total = simple1d_total(p, m);
    let m64 = m as i64;
    let closed = (-m64..=m64)
        .map(|k| {
            (
                lattice_label(LatticePoint::new(k, 0)),
                simple1d_point_prob(p, k, m),
            )
        })
        .filter(|(_, q)| !q.is_zero())
        .collect();
    let snapshot = walk2d_snapshot(&simple1d_walk(p), m)?;
    Ok(report(
        IdentityId::Eq4Simple1D,
        params,
        mode,
        total,
        closed,
        &snapshot.mass,
    ))
}

fn check_barrier2d(
    params: &IdentityParams,
    barrier: BarrierSpec,
    probs: &[Probability; 4],
    m: u32,
    mode: CoefficientMode,
) -> Result<IdentityReport> {
    check_quadrant_probs(probs)?;
    let (interior, absorbed) = chain2d_identity_terms(barrier, probs, m, mode)?;
    let n = barrier.size as i64;
    let counted = |pt: LatticePoint| mode == CoefficientMode::Corrected || m as i64 <= pt.h + pt.v;

    let mut closed = BTreeMap::new();
    for h in 0..n {
        for v in 0..n {
            let pt = LatticePoint::new(h, v);
            if counted(pt) {
                closed.insert(lattice_label(pt), chain2d_point_prob(probs, pt, m, mode)?);
            }
        }
    }
    for pt in barrier.cells() {
        if counted(pt) {
            closed.insert(
                StateLabel::Barrier(pt),
                chain2d_barrier_prob(probs, barrier, pt, m, mode)?,
            );
        }
    }
    closed.retain(|_, q| !q.is_zero());

    let spec = Walk2DSpec::delayed_quadrant(probs.clone(), barrier)?;
    let snapshot = walk2d_snapshot(&spec, m)?;
    Ok(report(
        IdentityId::Eq5Barrier2D,
        params,
        mode,
        interior + absorbed,
        closed,
        &snapshot.mass,
    ))
}

fn check_gosper(
    params: &IdentityParams,
    gp: &GosperParams,
    mode: CoefficientMode,
) -> Result<IdentityReport> {
    let terms = gosper_terms(gp)?;
    let n = gp.n;
    let mut closed = BTreeMap::new();
    let mut total = Rational::zero();
    for (k, (heads_wins, tails_wins)) in (0u32..).zip(terms) {
        total += &heads_wins;
        total += &tails_wins;
        closed.insert(StateLabel::RaceWon { heads: n, tails: k }, heads_wins);
        closed.insert(StateLabel::RaceWon { heads: k, tails: n }, tails_wins);
    }
    closed.retain(|_, q| !q.is_zero());
    let snapshot = gosper_race_snapshot(&gp.p, n, 2 * n - 1)?;
    Ok(report(
        IdentityId::Gosper,
        params,
        mode,
        total,
        closed,
        &snapshot.mass,
    ))
}

/// Evaluates one identity instance: total, residual, and state-by-state
/// comparison with the oracle.
pub fn check_identity(
    identity: IdentityId,
    params: &IdentityParams,
    mode: CoefficientMode,
) -> Result<IdentityReport> {
    match (identity, params) {
        (id, IdentityParams::Chain { spec, m }) if id.levels().is_some() => {
            chain_identity_for(id, spec)?;
            let snapshot = chain_snapshots(spec, *m)?.pop().expect("snapshot");
            check_chain(id, params, spec, *m, mode, &snapshot)
        }
        (IdentityId::Eq3Walk2D, IdentityParams::Walk2d { spec, m }) => {
            check_walk2d(params, spec, *m, mode)
        }
        (IdentityId::Eq4Simple1D, IdentityParams::Simple1d { p, m }) => {
            check_simple1d(params, p, *m, mode)
        }
        (IdentityId::Eq5Barrier2D, IdentityParams::Barrier2d { barrier, probs, m }) => {
            check_barrier2d(params, *barrier, probs, *m, mode)
        }
        (IdentityId::Gosper, IdentityParams::Gosper { p, n }) => {
            let gp = GosperParams::new(p.clone(), *n)?;
            check_gosper(params, &gp, mode)
        }
        (id, _) => Err(mismatch(id, "parameters belong to a different model")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Only the literal coefficients agree with the oracle.
    Literal,
    /// Only the corrected coefficients agree with the oracle.
    Corrected,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Adjudication {
    pub literal: IdentityReport,
    pub corrected: Option<IdentityReport>,
    pub verdict: Verdict,
}

/// Runs both coefficient modes where the identity has them and reports
/// which one reproduces the oracle; otherwise a single report.
pub fn adjudicate(identity: IdentityId, params: &IdentityParams) -> Result<Adjudication> {
    let literal = check_identity(identity, params, CoefficientMode::Literal)?;
    let corrected = if identity.has_modes() {
        Some(check_identity(
            identity,
            params,
            CoefficientMode::Corrected,
        )?)
    } else {
        None
    };
    let lit_ok = literal.matches_oracle();
    let verdict = match corrected.as_ref().map(IdentityReport::matches_oracle) {
        None if lit_ok => Verdict::Both,
        None => Verdict::Neither,
        Some(true) if lit_ok => Verdict::Both,
        Some(true) => Verdict::Corrected,
        Some(false) if lit_ok => Verdict::Literal,
        Some(false) => Verdict::Neither,
    };
    Ok(Adjudication {
        literal,
        corrected,
        verdict,
    })
}

/// Time range of a sweep, either fixed or `0 ..= mul * N + add`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MRange {
    Fixed { lo: u32, hi: u32 },
    ScaledN { mul: u32, add: i64 },
}

impl MRange {
    fn values(self, n: u32) -> Vec<u32> {
        match self {
            MRange::Fixed { lo, hi } => (lo..=hi).collect(),
            MRange::ScaledN { mul, add } => {
                let hi = mul as i64 * n as i64 + add;
                if hi < 0 {
                    Vec::new()
                } else {
                    (0..=hi as u32).collect()
                }
            }
        }
    }
}

/// A finite parameter grid. `n` is the chain length, barrier size or race
/// length (ignored by the walk identities); each entry of `probs` is one
/// probability vector; `m` is the time range (ignored by the race).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepGrid {
    pub n: Vec<u32>,
    pub probs: Vec<Vec<Probability>>,
    pub m: MRange,
}

impl SweepGrid {
    /// Every vector of length `len` over `values`, in lexicographic order.
    pub fn product(values: &[Probability], len: usize) -> Vec<Vec<Probability>> {
        (0..len).fold(vec![Vec::new()], |acc, _| {
            acc.iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect()
        })
    }
}

fn four(identity: IdentityId, probs: &[Probability]) -> Result<[Probability; 4]> {
    probs
        .to_vec()
        .try_into()
        .map_err(|_| mismatch(identity, "expected four move probabilities"))
}

/// Grid points in lexicographic order: `n`, then probability vector, then `m`.
fn grid_points(identity: IdentityId, grid: &SweepGrid) -> Result<Vec<IdentityParams>> {
    let mut out = Vec::new();
    let uses_n = !matches!(identity, IdentityId::Eq3Walk2D | IdentityId::Eq4Simple1D);
    let ns: Vec<u32> = if uses_n { grid.n.clone() } else { vec![0] };
    for &n in &ns {
        for probs in &grid.probs {
            let ms = grid.m.values(n);
            match identity {
                IdentityId::Gosper => {
                    let [p] = <[Probability; 1]>::try_from(probs.clone())
                        .map_err(|_| mismatch(identity, "expected one probability"))?;
                    out.push(IdentityParams::Gosper { p, n });
                }
                IdentityId::Eq4Simple1D => {
                    let [p] = <[Probability; 1]>::try_from(probs.clone())
                        .map_err(|_| mismatch(identity, "expected one probability"))?;
                    out.extend(
                        ms.into_iter()
                            .map(|m| IdentityParams::Simple1d { p: p.clone(), m }),
                    );
                }
                IdentityId::Eq3Walk2D => {
                    let spec = Walk2DSpec::unit_cross(four(identity, probs)?)?;
                    out.extend(ms.into_iter().map(|m| IdentityParams::Walk2d {
                        spec: spec.clone(),
                        m,
                    }));
                }
                IdentityId::Eq5Barrier2D => {
                    let probs = four(identity, probs)?;
                    check_quadrant_probs(&probs)?;
                    let barrier = BarrierSpec::new(n)?;
                    out.extend(ms.into_iter().map(|m| IdentityParams::Barrier2d {
                        barrier,
                        probs: probs.clone(),
                        m,
                    }));
                }
                _ => {
                    let spec = ChainSpec::new(n, probs.clone())?;
                    chain_identity_for(identity, &spec)?;
                    out.extend(ms.into_iter().map(|m| IdentityParams::Chain {
                        spec: spec.clone(),
                        m,
                    }));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepResult {
    pub identity: IdentityId,
    pub mode: CoefficientMode,
    pub points: usize,
    pub holds: usize,
    pub fails: usize,
    pub oracle_mismatches: usize,
    /// Index into `reports` of the first failing point in grid order.
    pub first_failure: Option<usize>,
    pub reports: Vec<IdentityReport>,
}

impl SweepResult {
    pub fn counterexample(&self) -> Option<&IdentityReport> {
        self.first_failure.map(|i| &self.reports[i])
    }
}

/// Checks every grid point. Chain points sharing a spec reuse one forward
/// pass of the oracle; groups run in parallel and merge in grid order.
pub fn sweep(identity: IdentityId, grid: &SweepGrid, mode: CoefficientMode) -> Result<SweepResult> {
    let points = grid_points(identity, grid)?;
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }

    // Consecutive chain points with the same spec form one group.
    let mut groups: Vec<Vec<IdentityParams>> = Vec::new();
    for params in points {
        let same = match (groups.last().and_then(|g| g.last()), &params) {
            (
                Some(IdentityParams::Chain { spec: a, .. }),
                IdentityParams::Chain { spec: b, .. },
            ) => a == b,
            _ => false,
        };
        if same {
            groups.last_mut().expect("group").push(params);
        } else {
            groups.push(vec![params]);
        }
    }

    let reports: Vec<IdentityReport> = groups
        .par_iter()
        .map(|group| -> Result<Vec<IdentityReport>> {
            match &group[0] {
                IdentityParams::Chain { spec, .. } => {
                    let max_m = group
                        .iter()
                        .map(|p| match p {
                            IdentityParams::Chain { m, .. } => *m,
                            _ => 0,
                        })
                        .max()
                        .unwrap_or(0);
                    let snapshots = chain_snapshots(spec, max_m)?;
                    group
                        .iter()
                        .map(|params| match params {
                            IdentityParams::Chain { spec, m } => check_chain(
                                identity,
                                params,
                                spec,
                                *m,
                                mode,
                                &snapshots[*m as usize],
                            ),
                            _ => unreachable!("chain group"),
                        })
                        .collect()
                }
                _ => group
                    .iter()
                    .map(|params| check_identity(identity, params, mode))
                    .collect(),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let holds = reports.iter().filter(|r| r.holds).count();
    Ok(SweepResult {
        identity,
        mode,
        points: reports.len(),
        holds,
        fails: reports.len() - holds,
        oracle_mismatches: reports.iter().filter(|r| !r.matches_oracle()).count(),
        first_failure: reports.iter().position(|r| !r.holds),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: i64, d: i64) -> Probability {
        Probability::ratio(n, d)
    }

    fn chain_params(n: u32, probs: Vec<Probability>, m: u32) -> IdentityParams {
        IdentityParams::Chain {
            spec: ChainSpec::new(n, probs).unwrap(),
            m,
        }
    }

    const LIT: CoefficientMode = CoefficientMode::Literal;
    const COR: CoefficientMode = CoefficientMode::Corrected;

    #[test]
    fn identity_names_round_trip() {
        for id in [
            IdentityId::Eq1Chain,
            IdentityId::Eq2TwoNode,
            IdentityId::ThreeNode,
            IdentityId::MultiLevel(4),
            IdentityId::Eq3Walk2D,
            IdentityId::Eq4Simple1D,
            IdentityId::Eq5Barrier2D,
            IdentityId::Gosper,
        ] {
            assert_eq!(id.to_string().parse::<IdentityId>().unwrap(), id);
        }
        assert!("eq9".parse::<IdentityId>().is_err());
        assert!("multilevel-0".parse::<IdentityId>().is_err());
    }

    #[test]
    fn figure_chain_holds() {
        let params = IdentityParams::Chain {
            spec: ChainSpec::simple(28, "0.1".parse().unwrap()).unwrap(),
            m: 13,
        };
        let rep = check_identity(IdentityId::Eq1Chain, &params, LIT).unwrap();
        assert!(rep.holds);
        assert!(rep.residual.is_zero());
        assert!(rep.matches_oracle());
        assert_eq!(rep.range_independent, Some(true));
    }

    #[test]
    fn uniform_walk_literal_fails() {
        let params = IdentityParams::Walk2d {
            spec: Walk2DSpec::uniform_cross(),
            m: 2,
        };
        let rep = check_identity(IdentityId::Eq3Walk2D, &params, LIT).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.residual, Rational::new(1, 4));
        // The four diagonal cells and nothing else are undercounted.
        assert_eq!(rep.oracle_diffs.len(), 4);
        assert!(rep
            .oracle_diffs
            .iter()
            .all(|d| d.oracle == &d.closed_form * Rational::from(2)));
    }

    #[test]
    fn simple1d_holds() {
        let rep = check_identity(
            IdentityId::Eq4Simple1D,
            &IdentityParams::Simple1d { p: p(2, 5), m: 6 },
            LIT,
        )
        .unwrap();
        assert!(rep.holds);
        assert!(rep.matches_oracle());
    }

    #[test]
    fn mismatched_params_rejected() {
        let params = chain_params(4, vec![p(1, 2)], 1);
        assert!(matches!(
            check_identity(IdentityId::Eq2TwoNode, &params, LIT),
            Err(Error::ParamMismatch(_))
        ));
        assert!(matches!(
            check_identity(IdentityId::Gosper, &params, LIT),
            Err(Error::ParamMismatch(_))
        ));
        let walk = IdentityParams::Walk2d {
            spec: Walk2DSpec::uniform_cross(),
            m: 1,
        };
        assert!(check_identity(IdentityId::Eq1Chain, &walk, LIT).is_err());
    }

    #[test]
    fn adjudication_examples() {
        let params = IdentityParams::Walk2d {
            spec: Walk2DSpec::uniform_cross(),
            m: 2,
        };
        let adj = adjudicate(IdentityId::Eq3Walk2D, &params).unwrap();
        assert!(!adj.literal.holds);
        let corrected = adj.corrected.as_ref().unwrap();
        assert!(corrected.holds);
        assert!(corrected.matches_oracle());
        assert_eq!(adj.verdict, Verdict::Corrected);

        let params = IdentityParams::Walk2d {
            spec: Walk2DSpec::uniform_cross(),
            m: 1,
        };
        let adj = adjudicate(IdentityId::Eq3Walk2D, &params).unwrap();
        assert!(adj.literal.holds && adj.corrected.as_ref().unwrap().holds);
        assert_eq!(adj.verdict, Verdict::Both);

        let adj = adjudicate(IdentityId::Eq1Chain, &chain_params(5, vec![p(1, 3)], 2)).unwrap();
        assert!(adj.corrected.is_none());
        assert!(adj.literal.holds);
        assert_eq!(adj.verdict, Verdict::Both);
    }

    #[test]
    fn barrier_smallest_case() {
        let quarter = [p(1, 4), p(1, 4), p(1, 4), p(1, 4)];
        let params = IdentityParams::Barrier2d {
            barrier: BarrierSpec::new(1).unwrap(),
            probs: quarter,
            m: 0,
        };
        let lit = check_identity(IdentityId::Eq5Barrier2D, &params, LIT).unwrap();
        assert_eq!(lit.total, Rational::new(3, 2));
        assert!(!lit.matches_oracle());
        let cor = check_identity(IdentityId::Eq5Barrier2D, &params, COR).unwrap();
        assert!(cor.holds);
        assert!(cor.matches_oracle());
    }

    #[test]
    fn chain_sweep_all_hold() {
        let grid = SweepGrid {
            n: (2..=10).collect(),
            probs: vec![vec![p(1, 10)], vec![p(1, 2)], vec![p(9, 10)]],
            m: MRange::ScaledN { mul: 2, add: 0 },
        };
        let result = sweep(IdentityId::Eq1Chain, &grid, LIT).unwrap();
        let expected: usize = (2..=10u32).map(|n| 3 * (2 * n as usize + 1)).sum();
        assert_eq!(result.points, expected);
        assert_eq!(result.fails, 0);
        assert_eq!(result.oracle_mismatches, 0);
        assert!(result.counterexample().is_none());
    }

    #[test]
    fn gosper_sweep_all_hold() {
        let grid = SweepGrid {
            n: (1..=20).collect(),
            probs: vec![vec![p(1, 7)], vec![p(1, 2)], vec![p(6, 7)]],
            m: MRange::Fixed { lo: 0, hi: 0 },
        };
        let result = sweep(IdentityId::Gosper, &grid, LIT).unwrap();
        assert_eq!(result.points, 60);
        assert_eq!(result.holds, 60);
        assert_eq!(result.oracle_mismatches, 0);
    }

    #[test]
    fn barrier_sweep_reports_literal_failures() {
        let grid = SweepGrid {
            n: (1..=4).collect(),
            probs: vec![vec![p(1, 4); 4]],
            m: MRange::ScaledN { mul: 2, add: 0 },
        };
        let literal = sweep(IdentityId::Eq5Barrier2D, &grid, LIT).unwrap();
        assert!(literal.fails > 0);
        let first = literal.counterexample().unwrap();
        assert_eq!(
            first.params,
            IdentityParams::Barrier2d {
                barrier: BarrierSpec::new(1).unwrap(),
                probs: [p(1, 4), p(1, 4), p(1, 4), p(1, 4)],
                m: 0
            }
        );
        assert_eq!(
            literal,
            sweep(IdentityId::Eq5Barrier2D, &grid, LIT).unwrap()
        );

        let corrected = sweep(IdentityId::Eq5Barrier2D, &grid, COR).unwrap();
        assert_eq!(corrected.fails, 0);
        assert_eq!(corrected.oracle_mismatches, 0);
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = SweepGrid {
            n: vec![],
            probs: vec![vec![p(1, 2)]],
            m: MRange::Fixed { lo: 0, hi: 3 },
        };
        assert_eq!(
            sweep(IdentityId::Eq1Chain, &grid, LIT),
            Err(Error::EmptyGrid)
        );
    }

    #[test]
    fn product_grid() {
        let vals = [p(0, 1), p(1, 2), p(1, 1)];
        let vecs = SweepGrid::product(&vals, 2);
        assert_eq!(vecs.len(), 9);
        assert_eq!(vecs[1], vec![p(0, 1), p(1, 2)]);
    }

    #[test]
    fn report_json_is_stable() {
        let params = IdentityParams::Walk2d {
            spec: Walk2DSpec::uniform_cross(),
            m: 2,
        };
        let a =
            serde_json::to_string(&check_identity(IdentityId::Eq3Walk2D, &params, LIT).unwrap())
                .unwrap();
        let b =
            serde_json::to_string(&check_identity(IdentityId::Eq3Walk2D, &params, LIT).unwrap())
                .unwrap();
        assert_eq!(a, b);
        assert!(a.contains(r#""residual":"1/4""#));
        assert!(a.contains(r#""identity":"eq3""#));
        assert!(a.contains(r#""mode":"literal""#));
    }
}

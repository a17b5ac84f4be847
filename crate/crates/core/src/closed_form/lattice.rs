//! Closed forms for lattice walks: the general 2D walk with jumps and travel
//! times, the simple ±1 walk, and the delayed quadrant walk under a barrier.
//!
//! Each family has a literal evaluator (the coefficients as stated) and a
//! corrected one that counts move orderings and the move in flight at the
//! snapshot, where the walker rests on the cell it is leaving.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::solve::enumerate_solutions;
use crate::arith::{choose, multinomial_u, Probability, Rational};
use crate::error::{Error, Result};
use crate::model::{BarrierSpec, LatticePoint, Walk2DSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoefficientMode {
    #[serde(rename = "literal")]
    Literal,
    #[serde(rename = "corrected")]
    Corrected,
}

impl CoefficientMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientMode::Literal => "literal",
            CoefficientMode::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for CoefficientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(CoefficientMode::Literal),
            "corrected" => Ok(CoefficientMode::Corrected),
            other => Err(Error::Parse(format!("unknown coefficient mode {other:?}"))),
        }
    }
}

/// Power tables `powers[i][e] = p_i^e` for every move.
fn power_tables(spec: &Walk2DSpec, max_exp: u32) -> Vec<Vec<Rational>> {
    spec.moves
        .iter()
        .map(|mv| {
            let mut row = vec![Rational::one()];
            for e in 1..=max_exp as usize {
                let next = &row[e - 1] * mv.prob.value();
                row.push(next);
            }
            row
        })
        .collect()
}

fn weight(powers: &[Vec<Rational>], counts: &[u32]) -> Rational {
    let mut acc = Rational::one();
    for (row, &c) in powers.iter().zip(counts) {
        acc *= &row[c as usize];
    }
    acc
}

/// The four-move shape the literal walk formula is written for:
/// right, left, up, down, each taking at least one tick.
struct CrossShape {
    jumps: [i64; 4],
    durations: [i64; 4],
}

fn literal_shape(spec: &Walk2DSpec) -> Result<CrossShape> {
    spec.check()?;
    let bad = |why: &str| Err(Error::Unsupported(format!("literal walk formula: {why}")));
    if spec.barrier.is_some() {
        return bad("walk has a barrier");
    }
    if spec.moves.len() != 4 {
        return bad("expected exactly four moves (right, left, up, down)");
    }
    let m = &spec.moves;
    let shape_ok = m[0].dy == 0
        && m[0].dx >= 0
        && m[1].dy == 0
        && m[1].dx <= 0
        && m[2].dx == 0
        && m[2].dy >= 0
        && m[3].dx == 0
        && m[3].dy <= 0;
    if !shape_ok {
        return bad("moves must be right, left, up, down in that order");
    }
    if m.iter().any(|mv| mv.duration == 0) {
        return bad("zero-duration moves");
    }
    Ok(CrossShape {
        jumps: [m[0].dx, m[1].dx, m[2].dy, m[3].dy],
        durations: [0, 1, 2, 3].map(|i| m[i].duration as i64),
    })
}

fn corrected_walk(spec: &Walk2DSpec) -> Result<()> {
    spec.check()?;
    if spec.barrier.is_some() {
        return Err(Error::Unsupported(
            "corrected walk formula needs an unbarriered walk; use the oracle".into(),
        ));
    }
    Ok(())
}

/// Literal per-point term: `Σ C(a+b, a) C(c+d, c) p1^a p2^b p3^c p4^d` over
/// the solutions of the two spatial equations and the time equation.
fn literal_point(
    shape: &CrossShape,
    powers: &[Vec<Rational>],
    point: LatticePoint,
    m: u32,
) -> Rational {
    let [j1, j2, j3, j4] = shape.jumps;
    let rows = vec![
        vec![j1, j2, 0, 0],
        vec![0, 0, j3, j4],
        shape.durations.to_vec(),
    ];
    enumerate_solutions(&rows, &[point.h, point.v, m as i64], 4, m)
        .iter()
        .map(|x| {
            let coeff = choose((x[0] + x[1]) as u64, x[0] as u64)
                * choose((x[2] + x[3]) as u64, x[2] as u64);
            Rational::from(coeff) * weight(powers, x)
        })
        .sum()
}

/// Move-count tuples whose total travel time is exactly `elapsed`.
fn count_tuples(
    spec: &Walk2DSpec,
    elapsed: u32,
    bound: u32,
    point: Option<LatticePoint>,
) -> Vec<Vec<u32>> {
    let dims = spec.moves.len();
    let mut rows = vec![spec
        .moves
        .iter()
        .map(|mv| mv.duration as i64)
        .collect::<Vec<_>>()];
    let mut targets = vec![elapsed as i64];
    if let Some(pt) = point {
        rows.push(spec.moves.iter().map(|mv| mv.dx).collect());
        rows.push(spec.moves.iter().map(|mv| mv.dy).collect());
        targets.push(pt.h);
        targets.push(pt.v);
    }
    enumerate_solutions(&rows, &targets, dims, bound)
}

/// Mass of a corrected walk state: resting at `point`, with either no move in
/// flight (`pending = None`, arrived exactly at `m`) or move `i` in flight.
pub fn walk2d_state_prob(
    spec: &Walk2DSpec,
    point: LatticePoint,
    pending: Option<usize>,
    m: u32,
) -> Result<Rational> {
    corrected_walk(spec)?;
    let powers = power_tables(spec, m);
    let arrangements = |x: &[u32]| {
        let parts: Vec<u64> = x.iter().map(|&c| c as u64).collect();
        Rational::from(multinomial_u(&parts))
    };
    match pending {
        None => Ok(count_tuples(spec, m, m, Some(point))
            .iter()
            .map(|x| arrangements(x) * weight(&powers, x))
            .sum()),
        Some(i) => {
            let mv = spec
                .moves
                .get(i)
                .ok_or_else(|| Error::OutOfRange(format!("move index {i}")))?;
            let first = (m + 1).saturating_sub(mv.duration);
            Ok((first..m)
                .flat_map(|tau| count_tuples(spec, tau, m, Some(point)))
                .map(|x| arrangements(&x) * weight(&powers, &x) * mv.prob.value())
                .sum())
        }
    }
}

/// Probability of observing the walker at `point` at time `m`.
pub fn walk2d_point_prob(
    spec: &Walk2DSpec,
    point: LatticePoint,
    m: u32,
    mode: CoefficientMode,
) -> Result<Rational> {
    match mode {
        CoefficientMode::Literal => {
            let shape = literal_shape(spec)?;
            Ok(literal_point(&shape, &power_tables(spec, m), point, m))
        }
        CoefficientMode::Corrected => {
            let mut total = walk2d_state_prob(spec, point, None, m)?;
            for i in 0..spec.moves.len() {
                if spec.moves[i].duration > 1 {
                    total += walk2d_state_prob(spec, point, Some(i), m)?;
                }
            }
            Ok(total)
        }
    }
}

/// All points with non-zero closed-form mass at time `m`, with their mass.
pub fn walk2d_distribution(
    spec: &Walk2DSpec,
    m: u32,
    mode: CoefficientMode,
) -> Result<BTreeMap<LatticePoint, Rational>> {
    let mut out: BTreeMap<LatticePoint, Rational> = BTreeMap::new();
    let locate = |x: &[u32]| {
        let (mut h, mut v) = (0i64, 0i64);
        for (mv, &c) in spec.moves.iter().zip(x) {
            h += mv.dx * c as i64;
            v += mv.dy * c as i64;
        }
        LatticePoint::new(h, v)
    };
    match mode {
        CoefficientMode::Literal => {
            let shape = literal_shape(spec)?;
            let powers = power_tables(spec, m);
            let [j1, j2, j3, j4] = shape.jumps;
            let m64 = m as i64;
            // The stated rectangle; every solution of the time equation lands in it.
            for x in count_tuples(spec, m, m, None) {
                let pt = locate(&x);
                debug_assert!((j2 * m64..=j1 * m64).contains(&pt.h));
                debug_assert!((j4 * m64..=j3 * m64).contains(&pt.v));
                let coeff = choose((x[0] + x[1]) as u64, x[0] as u64)
                    * choose((x[2] + x[3]) as u64, x[2] as u64);
                *out.entry(pt).or_insert_with(Rational::zero) +=
                    Rational::from(coeff) * weight(&powers, &x);
            }
        }
        CoefficientMode::Corrected => {
            corrected_walk(spec)?;
            let powers = power_tables(spec, m);
            for tau in 0..=m {
                let in_flight: Rational = spec
                    .moves
                    .iter()
                    .filter(|mv| tau + mv.duration > m)
                    .map(|mv| mv.prob.value())
                    .sum();
                if in_flight.is_zero() {
                    continue;
                }
                for x in count_tuples(spec, tau, m, None) {
                    let parts: Vec<u64> = x.iter().map(|&c| c as u64).collect();
                    let term = Rational::from(multinomial_u(&parts)) * weight(&powers, &x);
                    *out.entry(locate(&x)).or_insert_with(Rational::zero) += term * &in_flight;
                }
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Sum of the point probabilities over the stated rectangle (literal) or
/// over every reachable point (corrected).
pub fn walk2d_identity_total(spec: &Walk2DSpec, m: u32, mode: CoefficientMode) -> Result<Rational> {
    Ok(walk2d_distribution(spec, m, mode)?.values().sum())
}

/// `C(m, (m+k)/2) p^((m+k)/2) (1-p)^((m-k)/2)` when `k ≡ m (mod 2)` and
/// `|k| <= m`, else zero.
pub fn simple1d_point_prob(p: &Probability, k: i64, m: u32) -> Rational {
    let m64 = m as i64;
    if k.abs() > m64 || (m64 - k).rem_euclid(2) != 0 {
        return Rational::zero();
    }
    let right = ((m64 + k) / 2) as u32;
    let left = m - right;
    Rational::from(choose(m as u64, right as u64))
        * p.value().pow(right)
        * p.complement().value().pow(left)
}

pub fn simple1d_total(p: &Probability, m: u32) -> Rational {
    let m64 = m as i64;
    (-m64..=m64).map(|k| simple1d_point_prob(p, k, m)).sum()
}

/// `Σ_{a+c=τ} C(h,a) C(v,c) p1^a p2^(h-a) p3^c p4^(v-c)`.
fn quadrant_sum(probs: &[Probability; 4], h: u32, v: u32, tau: u32) -> Rational {
    let [p1, p2, p3, p4] = probs.each_ref().map(|p| p.value());
    let lo = tau.saturating_sub(v);
    let hi = tau.min(h);
    (lo..=hi)
        .map(|a| {
            let c = tau - a;
            let coeff = choose(h as u64, a as u64) * choose(v as u64, c as u64);
            Rational::from(coeff) * p1.pow(a) * p2.pow(h - a) * p3.pow(c) * p4.pow(v - c)
        })
        .sum()
}

fn quadrant_coords(point: LatticePoint) -> Result<(u32, u32)> {
    if point.h < 0 || point.v < 0 {
        return Err(Error::OutOfRange(format!("negative coordinates {point}")));
    }
    Ok((point.h as u32, point.v as u32))
}

/// Occupancy of a non-barrier cell in the delayed quadrant walk.
///
/// Literal: the stated sum over `a + c = m`. Corrected: additionally
/// multiplied by the `C(h+v, h)` orderings of right and up moves and by the
/// chance `p1 + p3` that the walker is waiting on a delayed move.
pub fn chain2d_point_prob(
    probs: &[Probability; 4],
    point: LatticePoint,
    m: u32,
    mode: CoefficientMode,
) -> Result<Rational> {
    let (h, v) = quadrant_coords(point)?;
    let base = quadrant_sum(probs, h, v, m);
    Ok(match mode {
        CoefficientMode::Literal => base,
        CoefficientMode::Corrected => {
            let waiting = probs[0].value() + probs[2].value();
            base * Rational::from(choose((h + v) as u64, h as u64)) * waiting
        }
    })
}

/// Cumulative mass absorbed at barrier cell `point` by time `m`.
///
/// Literal: the stated inner sum with `a + c` running from 0 to `m`.
/// Corrected: the final move must cross into the barrier, so the orderings
/// are `C(h+v-1, ·)` with the crossing move last.
pub fn chain2d_barrier_prob(
    probs: &[Probability; 4],
    barrier: BarrierSpec,
    point: LatticePoint,
    m: u32,
    mode: CoefficientMode,
) -> Result<Rational> {
    if !barrier.contains(point) {
        return Err(Error::OutOfRange(format!("{point} is not a barrier cell")));
    }
    let (h, v) = quadrant_coords(point)?;
    let cumulative: Rational = (0..=m).map(|tau| quadrant_sum(probs, h, v, tau)).sum();
    Ok(match mode {
        CoefficientMode::Literal => cumulative,
        CoefficientMode::Corrected => {
            let n = barrier.size;
            // (N, v): last move right, (h, N): last move up.
            let orderings = if h == n {
                choose((h + v - 1) as u64, v as u64)
            } else {
                choose((h + v - 1) as u64, h as u64)
            };
            cumulative * Rational::from(orderings)
        }
    })
}

/// `(interior, barrier)` summands of the barrier identity.
///
/// The interior runs over `0 <= h, v <= N - 1`. The literal mode keeps the
/// stated `m <= h + v` filter on both sums; the corrected mode sums every
/// barrier cell.
pub fn chain2d_identity_terms(
    barrier: BarrierSpec,
    probs: &[Probability; 4],
    m: u32,
    mode: CoefficientMode,
) -> Result<(Rational, Rational)> {
    check_quadrant_probs(probs)?;
    let n = barrier.size as i64;
    let reaches = |pt: &LatticePoint| match mode {
        CoefficientMode::Literal => m as i64 <= pt.h + pt.v,
        CoefficientMode::Corrected => true,
    };
    let interior = (0..n)
        .flat_map(|h| (0..n).map(move |v| LatticePoint::new(h, v)))
        .filter(reaches)
        .map(|pt| chain2d_point_prob(probs, pt, m, mode))
        .sum::<Result<Rational>>()?;
    let absorbed = barrier
        .cells()
        .into_iter()
        .filter(reaches)
        .map(|pt| chain2d_barrier_prob(probs, barrier, pt, m, mode))
        .sum::<Result<Rational>>()?;
    Ok((interior, absorbed))
}

pub(crate) fn check_quadrant_probs(probs: &[Probability; 4]) -> Result<()> {
    let total: Rational = probs.iter().map(|p| p.value()).sum();
    if !total.is_one() {
        return Err(Error::InvalidModel(format!(
            "move probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

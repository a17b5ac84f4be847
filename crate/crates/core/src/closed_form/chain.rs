//! Closed forms for delayed chains with probability towers.
//!
//! A completed transition from `c_i` to `c_{i+1}` takes `d` time units,
//! `0 <= d <= L`: it is instant with probability `1 - p_1`, takes `d < L`
//! units with probability `p_1 ⋯ p_d (1 - p_{d+1})`, and `L` units with
//! probability `p_1 ⋯ p_L`. A point observed in tower level `r` above `c_k`
//! has completed `k - 1` transitions and has spent `r - 1` units of the
//! current one, which carries the pending factor `p_1 ⋯ p_r`.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use super::solve::enumerate_solutions;
use crate::arith::{choose, Rational};
use crate::error::{Error, Result};
use crate::model::ChainSpec;

/// Counts of completed transitions grouped by duration, plus the level of the
/// transition in progress.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DelayComposition {
    /// Number of instant transitions.
    pub instants: u32,
    /// `counts[d - 1]` = transitions that took `d` units, `d = 1..=L`.
    pub counts: Vec<u32>,
    /// 0 when nothing is pending, otherwise the tower level `r`.
    pub pending_level: u32,
    /// `Σ d · counts[d-1] + max(r - 1, 0)`.
    pub elapsed: u32,
}

impl DelayComposition {
    pub fn completed(&self) -> u32 {
        self.instants + self.counts.iter().sum::<u32>()
    }

    /// `C(n, a_L) · C(n - a_L, a_{L-1}) ⋯ C(n - a_L - ⋯ - a_2, a_1)` with
    /// `n` the number of completed transitions.
    pub fn arrangements(&self) -> BigUint {
        let mut remaining = self.completed() as u64;
        let mut acc = BigUint::one();
        for &a in self.counts.iter().rev() {
            acc *= choose(remaining, a as u64);
            remaining -= a as u64;
        }
        acc
    }
}

/// Compositions of exactly `transitions` completed transitions whose
/// durations, together with `pending_level`, account for `elapsed` units.
pub fn delay_compositions(
    levels: u32,
    transitions: u32,
    elapsed: u32,
    pending_level: u32,
) -> Vec<DelayComposition> {
    let in_tower = pending_level.saturating_sub(1);
    let Some(busy) = elapsed.checked_sub(in_tower) else {
        return Vec::new();
    };
    let dims = levels as usize + 1;
    // x = (instants, a_1, .., a_L)
    let durations: Vec<i64> = (0..=levels as i64).collect();
    let ones = vec![1i64; dims];
    enumerate_solutions(
        &[durations, ones],
        &[busy as i64, transitions as i64],
        dims,
        transitions,
    )
    .into_iter()
    .map(|x| DelayComposition {
        instants: x[0],
        counts: x[1..].to_vec(),
        pending_level,
        elapsed,
    })
    .collect()
}

/// Per-spec weight tables, reused across every `(k, r, m)` query.
#[derive(Debug, Clone)]
pub struct ChainEvaluator {
    n_states: u32,
    levels: u32,
    /// `pending[r]` = `p_1 ⋯ p_r`, `pending[0] = 1`.
    pending: Vec<Rational>,
    /// `powers[d][e]` = (weight of a duration-`d` transition)^e.
    powers: Vec<Vec<Rational>>,
}

impl ChainEvaluator {
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        spec.check()?;
        let levels = spec.levels;
        let mut pending = vec![Rational::one()];
        for r in 1..=levels {
            let next = &pending[r as usize - 1] * spec.prob(r);
            pending.push(next);
        }
        let weights: Vec<Rational> = (0..=levels)
            .map(|d| {
                if d == levels {
                    pending[d as usize].clone()
                } else {
                    &pending[d as usize] * spec.prob(d + 1).complement()
                }
            })
            .collect();
        let max_exp = spec.n_states - 1;
        let powers = weights
            .iter()
            .map(|w| {
                let mut row = vec![Rational::one()];
                for e in 1..=max_exp as usize {
                    let next = &row[e - 1] * w;
                    row.push(next);
                }
                row
            })
            .collect();
        Ok(ChainEvaluator {
            n_states: spec.n_states,
            levels,
            pending,
            powers,
        })
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    fn term(&self, comp: &DelayComposition) -> Rational {
        let mut acc = Rational::from(comp.arrangements());
        acc *= &self.powers[0][comp.instants as usize];
        for (d, &a) in comp.counts.iter().enumerate() {
            acc *= &self.powers[d + 1][a as usize];
        }
        acc * &self.pending[comp.pending_level as usize]
    }

    fn check_position(&self, k: u32) -> Result<()> {
        if k < 1 || k >= self.n_states {
            return Err(Error::OutOfRange(format!(
                "position k = {k} outside [1, {}]",
                self.n_states - 1
            )));
        }
        Ok(())
    }

    /// Probability of sitting in tower level `r` above `c_k` at `m τ⁺`.
    pub fn level_prob(&self, k: u32, level: u32, m: u32) -> Result<Rational> {
        self.check_position(k)?;
        if level < 1 || level > self.levels {
            return Err(Error::OutOfRange(format!(
                "tower level {level} outside [1, {}]",
                self.levels
            )));
        }
        Ok(delay_compositions(self.levels, k - 1, m, level)
            .iter()
            .map(|c| self.term(c))
            .sum())
    }

    /// Probability of being above `c_k` (any level) at `m τ⁺`.
    pub fn position_prob(&self, k: u32, m: u32) -> Result<Rational> {
        self.check_position(k)?;
        (1..=self.levels).map(|r| self.level_prob(k, r, m)).sum()
    }

    /// Probability of having reached `c_N` by time `m`.
    pub fn absorbed_cdf(&self, m: u32) -> Rational {
        let transitions = self.n_states - 1;
        let horizon = m.min(self.levels * transitions);
        (0..=horizon)
            .flat_map(|w| delay_compositions(self.levels, transitions, w, 0))
            .map(|c| self.term(&c))
            .sum()
    }

    /// Smallest position with non-zero mass at time `m`: `1 + ⌊m / L⌋`.
    pub fn first_reachable(&self, m: u32) -> u32 {
        1 + m / self.levels
    }

    /// `(A, B)`: tower mass summed over `k` from `1 + ⌊m/L⌋` to `N - 1`, and
    /// the absorbed mass.
    pub fn identity_terms(&self, m: u32) -> (Rational, Rational) {
        let lo = self.first_reachable(m);
        let a = (lo..self.n_states)
            .map(|k| self.position_prob(k, m).expect("k in range"))
            .sum();
        (a, self.absorbed_cdf(m))
    }

    /// Same as [`identity_terms`](Self::identity_terms) but with `k` over the
    /// whole range `[1, N - 1]`.
    pub fn identity_terms_all_k(&self, m: u32) -> (Rational, Rational) {
        let a = (1..self.n_states)
            .map(|k| self.position_prob(k, m).expect("k in range"))
            .sum();
        (a, self.absorbed_cdf(m))
    }
}

fn require_single_level(spec: &ChainSpec) -> Result<&Rational> {
    spec.check()?;
    if spec.levels != 1 {
        return Err(Error::Unsupported(format!(
            "single-level formula on a {}-level chain",
            spec.levels
        )));
    }
    Ok(spec.prob(1))
}

/// `p · C(k-1, m) · p^m · (1-p)^(k-1-m)` for `m <= k - 1`, else zero.
pub fn chain_position_prob(spec: &ChainSpec, k: u32, m: u32) -> Result<Rational> {
    let p = require_single_level(spec)?;
    if k < 1 || k >= spec.n_states {
        return Err(Error::OutOfRange(format!(
            "position k = {k} outside [1, {}]",
            spec.n_states - 1
        )));
    }
    if m > k - 1 {
        return Ok(Rational::zero());
    }
    let coeff = Rational::from(choose((k - 1) as u64, m as u64));
    Ok(p * coeff * p.pow(m) * p.complement().pow(k - 1 - m))
}

/// `Σ_{w=0}^{m} C(N-1, w) p^w (1-p)^(N-1-w)`.
pub fn chain_absorbed_cdf(spec: &ChainSpec, m: u32) -> Result<Rational> {
    let p = require_single_level(spec)?;
    let n = spec.n_states - 1;
    let q = p.complement();
    Ok((0..=m.min(n))
        .map(|w| Rational::from(choose(n as u64, w as u64)) * p.pow(w) * q.pow(n - w))
        .sum())
}

pub fn multilevel_position_prob(spec: &ChainSpec, k: u32, m: u32) -> Result<Rational> {
    ChainEvaluator::new(spec)?.position_prob(k, m)
}

pub fn multilevel_level_prob(spec: &ChainSpec, k: u32, level: u32, m: u32) -> Result<Rational> {
    ChainEvaluator::new(spec)?.level_prob(k, level, m)
}

pub fn multilevel_absorbed_cdf(spec: &ChainSpec, m: u32) -> Result<Rational> {
    Ok(ChainEvaluator::new(spec)?.absorbed_cdf(m))
}

/// The two summands of the chain identity. Single-level chains use the
/// direct binomial forms with `k` from `m + 1`; towers use the composition
/// sums with `k` from `1 + ⌊m/L⌋`.
pub fn chain_identity_terms(spec: &ChainSpec, m: u32) -> Result<(Rational, Rational)> {
    if spec.levels == 1 {
        let n = spec.n_states;
        let a = (m + 1..n)
            .map(|k| chain_position_prob(spec, k, m))
            .sum::<Result<Rational>>()?;
        return Ok((a, chain_absorbed_cdf(spec, m)?));
    }
    Ok(ChainEvaluator::new(spec)?.identity_terms(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Probability;

    fn p(n: i64, d: i64) -> Probability {
        Probability::ratio(n, d)
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn chain(n: u32, probs: &[(i64, i64)]) -> ChainSpec {
        ChainSpec::new(n, probs.iter().map(|&(a, b)| p(a, b)).collect()).unwrap()
    }

    #[test]
    fn single_level_position_examples() {
        let half = chain(5, &[(1, 2)]);
        assert_eq!(chain_position_prob(&half, 1, 0).unwrap(), r(1, 2));
        assert_eq!(chain_position_prob(&half, 3, 1).unwrap(), r(1, 4));
        let sure = chain(5, &[(1, 1)]);
        assert_eq!(chain_position_prob(&sure, 4, 3).unwrap(), r(1, 1));
        assert_eq!(chain_position_prob(&half, 2, 2).unwrap(), r(0, 1));
        assert!(chain_position_prob(&half, 0, 0).is_err());
        assert!(chain_position_prob(&half, 5, 0).is_err());
        assert!(chain_position_prob(&chain(5, &[(1, 2), (1, 2)]), 1, 0).is_err());
    }

    #[test]
    fn single_level_absorbed_examples() {
        assert_eq!(
            chain_absorbed_cdf(&chain(2, &[(1, 3)]), 0).unwrap(),
            r(2, 3)
        );
        assert_eq!(
            chain_absorbed_cdf(&chain(3, &[(1, 2)]), 1).unwrap(),
            r(3, 4)
        );
        for m in 6..10 {
            assert_eq!(
                chain_absorbed_cdf(&chain(7, &[(2, 7)]), m).unwrap(),
                r(1, 1)
            );
        }
    }

    #[test]
    fn two_level_examples() {
        let (p1, p2) = (r(1, 3), r(2, 5));
        let spec = chain(2, &[(1, 3), (2, 5)]);
        assert_eq!(multilevel_position_prob(&spec, 1, 1).unwrap(), &p1 * &p2);
        assert_eq!(
            multilevel_absorbed_cdf(&spec, 1).unwrap(),
            p1.complement() + &p1 * p2.complement()
        );
        let spec = chain(6, &[(1, 3), (2, 5)]);
        for k in 1..6 {
            assert_eq!(
                multilevel_position_prob(&spec, k, 0).unwrap(),
                &p1 * p1.complement().pow(k - 1)
            );
        }
    }

    #[test]
    fn three_level_complete_by_three_units() {
        let spec = chain(2, &[(1, 3), (1, 2), (3, 4)]);
        for m in 3..6 {
            assert_eq!(multilevel_absorbed_cdf(&spec, m).unwrap(), r(1, 1));
        }
        assert!(multilevel_absorbed_cdf(&spec, 2).unwrap() < r(1, 1));
    }

    #[test]
    fn second_level_unreachable_degenerates() {
        let two = chain(7, &[(2, 5), (0, 1)]);
        let one = chain(7, &[(2, 5)]);
        for k in 1..7 {
            for m in 0..10 {
                assert_eq!(
                    multilevel_position_prob(&two, k, m).unwrap(),
                    chain_position_prob(&one, k, m).unwrap()
                );
            }
        }
    }

    #[test]
    fn identity_terms_examples() {
        let spec = chain(3, &[(1, 2)]);
        assert_eq!(chain_identity_terms(&spec, 1).unwrap(), (r(1, 4), r(3, 4)));

        let fig = ChainSpec::simple(28, "0.1".parse().unwrap()).unwrap();
        let (a, b) = chain_identity_terms(&fig, 5).unwrap();
        assert!((a + b).is_one());

        let spec = chain(9, &[(2, 7)]);
        let q = r(5, 7);
        let (a, b) = chain_identity_terms(&spec, 0).unwrap();
        assert_eq!(b, q.pow(8));
        assert_eq!(a, q.pow(8).complement());
    }

    #[test]
    fn composition_elapsed_is_consistent() {
        for levels in 1..=4 {
            for r in 0..=levels {
                for w in 0..10 {
                    for c in delay_compositions(levels, 5, w, r) {
                        let busy: u32 = c
                            .counts
                            .iter()
                            .enumerate()
                            .map(|(d, a)| (d as u32 + 1) * a)
                            .sum();
                        assert_eq!(busy + r.saturating_sub(1), w);
                        assert_eq!(c.completed(), 5);
                    }
                }
            }
        }
        assert!(delay_compositions(3, 2, 1, 3).is_empty());
    }

    #[test]
    fn range_start_is_an_optimization() {
        for probs in [[(1, 2), (1, 3)], [(1, 1), (1, 1)], [(3, 4), (0, 1)]] {
            let ev = ChainEvaluator::new(&chain(6, &probs)).unwrap();
            for m in 0..12 {
                assert_eq!(ev.identity_terms(m), ev.identity_terms_all_k(m));
            }
        }
    }
}

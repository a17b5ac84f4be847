//! Exact distribution stepping over sparse state maps.

use std::collections::BTreeMap;

use super::{Snapshot, StateLabel};
use crate::arith::{Probability, Rational};
use crate::error::{Error, Result};
use crate::model::{ChainSpec, LatticePoint, Walk2DSpec};

fn add_to<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, q: Rational) {
    if q.is_zero() {
        return;
    }
    *map.entry(key).or_insert_with(Rational::zero) += q;
}

struct ChainProcess<'a> {
    spec: &'a ChainSpec,
    /// (position, level) -> mass
    towers: BTreeMap<(u32, u32), Rational>,
    absorbed: Rational,
}

impl<'a> ChainProcess<'a> {
    fn start(spec: &'a ChainSpec) -> Self {
        let mut process = ChainProcess {
            spec,
            towers: BTreeMap::new(),
            absorbed: Rational::zero(),
        };
        process.arrive(1, Rational::one());
        process
    }

    /// Instant closure from node `c_k`: run along instant transitions until
    /// the mass is parked in level-1 towers or absorbed.
    fn arrive(&mut self, mut k: u32, mut q: Rational) {
        let p1 = self.spec.prob(1);
        let instant = p1.complement();
        while !q.is_zero() {
            if k == self.spec.n_states {
                self.absorbed += q;
                return;
            }
            add_to(&mut self.towers, (k, 1), &q * p1);
            q *= &instant;
            k += 1;
        }
    }

    fn tick(&mut self) {
        let levels = self.spec.levels;
        let towers = std::mem::take(&mut self.towers);
        for ((k, r), q) in towers {
            if r < levels {
                let up = self.spec.prob(r + 1);
                add_to(&mut self.towers, (k, r + 1), &q * up);
                self.arrive(k + 1, q * up.complement());
            } else {
                self.arrive(k + 1, q);
            }
        }
    }

    fn snapshot(&self, time: u32) -> Snapshot {
        let mut mass: BTreeMap<StateLabel, Rational> = self
            .towers
            .iter()
            .map(|(&(position, level), q)| (StateLabel::Tower { position, level }, q.clone()))
            .collect();
        mass.insert(StateLabel::Terminal, self.absorbed.clone());
        Snapshot::new(time, mass)
    }
}

/// Snapshots at `m = 0..=max_m` from a single forward pass.
pub fn chain_snapshots(spec: &ChainSpec, max_m: u32) -> Result<Vec<Snapshot>> {
    spec.check()?;
    let mut process = ChainProcess::start(spec);
    let mut out = vec![process.snapshot(0)];
    for m in 1..=max_m {
        process.tick();
        out.push(process.snapshot(m));
    }
    Ok(out)
}

pub fn chain_snapshot(spec: &ChainSpec, m: u32) -> Result<Snapshot> {
    Ok(chain_snapshots(spec, m)?
        .pop()
        .expect("at least one snapshot"))
}

struct WalkProcess<'a> {
    spec: &'a Walk2DSpec,
    instant_total: Rational,
    delayed_total: Rational,
    resting: BTreeMap<LatticePoint, Rational>,
    /// (point, move, ticks remaining) -> mass
    in_flight: BTreeMap<(LatticePoint, usize, u32), Rational>,
    absorbed: BTreeMap<LatticePoint, Rational>,
}

impl<'a> WalkProcess<'a> {
    fn start(spec: &'a Walk2DSpec) -> Result<Self> {
        spec.check()?;
        let (instant, delayed): (Vec<_>, Vec<_>) =
            spec.moves.iter().partition(|mv| mv.is_instant());
        let total = |moves: Vec<&crate::model::MoveRule>| -> Rational {
            moves.into_iter().map(|mv| mv.prob.value()).sum()
        };
        let mut process = WalkProcess {
            spec,
            instant_total: total(instant),
            delayed_total: total(delayed),
            resting: BTreeMap::new(),
            in_flight: BTreeMap::new(),
            absorbed: BTreeMap::new(),
        };
        let mut arrivals = BTreeMap::new();
        arrivals.insert(LatticePoint::ORIGIN, Rational::one());
        process.arrive(arrivals)?;
        Ok(process)
    }

    /// Resolves instant moves. Instant moves strictly increase `h + v`, so
    /// processing arrivals in that order visits each cell once.
    fn arrive(&mut self, arrivals: BTreeMap<LatticePoint, Rational>) -> Result<()> {
        let key = |pt: LatticePoint| (pt.h + pt.v, pt.h, pt.v);
        let mut queue: BTreeMap<(i64, i64, i64), Rational> =
            arrivals.into_iter().map(|(pt, q)| (key(pt), q)).collect();
        while let Some(((_, h, v), q)) = queue.pop_first() {
            let pt = LatticePoint::new(h, v);
            match self.spec.barrier {
                Some(barrier) if barrier.contains(pt) => {
                    add_to(&mut self.absorbed, pt, q);
                    continue;
                }
                Some(barrier) if !self.instant_total.is_zero() => {
                    let n = barrier.size as i64;
                    if h > n || v > n {
                        return Err(Error::BarrierEscape(h, v));
                    }
                }
                _ => {}
            }
            for mv in self.spec.moves.iter().filter(|mv| mv.is_instant()) {
                let next = pt.offset(mv.dx, mv.dy);
                add_to(&mut queue, key(next), &q * mv.prob.value());
            }
            add_to(&mut self.resting, pt, q * &self.delayed_total);
        }
        Ok(())
    }

    fn tick(&mut self) -> Result<()> {
        for (pt, q) in std::mem::take(&mut self.resting) {
            let share = q / &self.delayed_total;
            for (i, mv) in self
                .spec
                .moves
                .iter()
                .enumerate()
                .filter(|(_, mv)| !mv.is_instant())
            {
                add_to(
                    &mut self.in_flight,
                    (pt, i, mv.duration),
                    &share * mv.prob.value(),
                );
            }
        }
        let mut arrivals = BTreeMap::new();
        for ((pt, i, remaining), q) in std::mem::take(&mut self.in_flight) {
            if remaining == 1 {
                let mv = &self.spec.moves[i];
                add_to(&mut arrivals, pt.offset(mv.dx, mv.dy), q);
            } else {
                self.in_flight.insert((pt, i, remaining - 1), q);
            }
        }
        self.arrive(arrivals)
    }

    fn snapshot(&self, time: u32) -> Snapshot {
        let mut mass = BTreeMap::new();
        for (pt, q) in &self.resting {
            add_to(
                &mut mass,
                StateLabel::Lattice {
                    point: *pt,
                    pending: None,
                },
                q.clone(),
            );
        }
        for ((pt, i, _), q) in &self.in_flight {
            add_to(
                &mut mass,
                StateLabel::Lattice {
                    point: *pt,
                    pending: Some(*i),
                },
                q.clone(),
            );
        }
        for (pt, q) in &self.absorbed {
            mass.insert(StateLabel::Barrier(*pt), q.clone());
        }
        Snapshot::new(time, mass)
    }
}

pub fn walk2d_snapshots(spec: &Walk2DSpec, max_m: u32) -> Result<Vec<Snapshot>> {
    let mut process = WalkProcess::start(spec)?;
    let mut out = vec![process.snapshot(0)];
    for m in 1..=max_m {
        process.tick()?;
        out.push(process.snapshot(m));
    }
    Ok(out)
}

pub fn walk2d_snapshot(spec: &Walk2DSpec, m: u32) -> Result<Snapshot> {
    Ok(walk2d_snapshots(spec, m)?
        .pop()
        .expect("at least one snapshot"))
}

/// Flip a `p`-coin up to `max_flips` times, stopping once either side has
/// come up `n` times.
pub fn gosper_race_snapshot(p: &Probability, n: u32, max_flips: u32) -> Result<Snapshot> {
    if n < 1 {
        return Err(Error::OutOfRange("race length N must be at least 1".into()));
    }
    let (heads_p, tails_p) = (p.value(), p.complement().into_rational());
    let mut running: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    running.insert((0, 0), Rational::one());
    let mut mass = BTreeMap::new();
    for _ in 0..max_flips {
        if running.is_empty() {
            break;
        }
        for ((h, t), q) in std::mem::take(&mut running) {
            for (next, w) in [((h + 1, t), heads_p), ((h, t + 1), &tails_p)] {
                let q = &q * w;
                if next.0 == n || next.1 == n {
                    add_to(
                        &mut mass,
                        StateLabel::RaceWon {
                            heads: next.0,
                            tails: next.1,
                        },
                        q,
                    );
                } else {
                    add_to(&mut running, next, q);
                }
            }
        }
    }
    for ((heads, tails), q) in running {
        add_to(&mut mass, StateLabel::Race { heads, tails }, q);
    }
    Ok(Snapshot::new(max_flips, mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BarrierSpec, MoveRule};

    fn p(n: i64, d: i64) -> Probability {
        Probability::ratio(n, d)
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn tower(position: u32, level: u32) -> StateLabel {
        StateLabel::Tower { position, level }
    }

    fn resting(h: i64, v: i64) -> StateLabel {
        StateLabel::Lattice {
            point: LatticePoint::new(h, v),
            pending: None,
        }
    }

    #[test]
    fn chain_examples() {
        let snap = chain_snapshot(&ChainSpec::simple(2, p(1, 2)).unwrap(), 0).unwrap();
        assert_eq!(snap.get(&tower(1, 1)), r(1, 2));
        assert_eq!(snap.absorbed, r(1, 2));
        assert_eq!(snap.mass.len(), 2);

        let snap = chain_snapshot(&ChainSpec::simple(3, p(1, 2)).unwrap(), 1).unwrap();
        assert_eq!(snap.get(&tower(2, 1)), r(1, 4));
        assert_eq!(snap.absorbed, r(3, 4));
        assert_eq!(snap.mass.len(), 2);

        let snap = chain_snapshot(&ChainSpec::new(2, vec![p(1, 2), p(1, 2)]).unwrap(), 1).unwrap();
        assert_eq!(snap.get(&tower(1, 2)), r(1, 4));
        assert_eq!(snap.absorbed, r(3, 4));
    }

    #[test]
    fn deterministic_chains() {
        let sure = ChainSpec::simple(2, p(1, 1)).unwrap();
        assert!(chain_snapshot(&sure, 1).unwrap().absorbed.is_one());
        let never = ChainSpec::simple(2, p(0, 1)).unwrap();
        assert!(chain_snapshot(&never, 0).unwrap().absorbed.is_one());
    }

    #[test]
    fn chain_mass_conserved() {
        let spec = ChainSpec::new(6, vec![p(1, 3), p(3, 4), p(1, 2)]).unwrap();
        for snap in chain_snapshots(&spec, 30).unwrap() {
            assert!(snap.is_conserved(), "m = {}", snap.time);
        }
    }

    #[test]
    fn uniform_walk() {
        let spec = Walk2DSpec::uniform_cross();
        let one = walk2d_snapshot(&spec, 1).unwrap();
        for (h, v) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            assert_eq!(one.get(&resting(h, v)), r(1, 4));
        }
        let two = walk2d_snapshot(&spec, 2).unwrap();
        assert_eq!(two.get(&resting(1, 1)), r(2, 16));
        assert_eq!(two.get(&resting(0, 0)), r(4, 16));
        assert!(two.is_conserved());
    }

    #[test]
    fn quadrant_walk_at_time_zero() {
        let probs = [p(1, 10), p(2, 10), p(3, 10), p(4, 10)];
        let spec = Walk2DSpec::delayed_quadrant(probs, BarrierSpec::new(1).unwrap()).unwrap();
        let snap = walk2d_snapshot(&spec, 0).unwrap();
        assert_eq!(snap.get(&resting(0, 0)), r(4, 10));
        assert_eq!(
            snap.get(&StateLabel::Barrier(LatticePoint::new(1, 0))),
            r(2, 10)
        );
        assert_eq!(
            snap.get(&StateLabel::Barrier(LatticePoint::new(0, 1))),
            r(4, 10)
        );
        assert_eq!(snap.mass.len(), 3);
    }

    #[test]
    fn long_moves_stay_in_flight() {
        let spec = Walk2DSpec::new(
            vec![
                MoveRule::new(1, 0, 1, p(1, 2)),
                MoveRule::new(0, 1, 3, p(1, 2)),
            ],
            None,
        )
        .unwrap();
        let snaps = walk2d_snapshots(&spec, 6).unwrap();
        let flying = StateLabel::Lattice {
            point: LatticePoint::ORIGIN,
            pending: Some(1),
        };
        assert_eq!(snaps[1].get(&flying), r(1, 2));
        assert_eq!(snaps[2].get(&flying), r(1, 2));
        assert!(snaps[3].get(&flying).is_zero());
        assert_eq!(snaps[3].get(&resting(0, 1)), r(1, 2));
        assert!(snaps.iter().all(Snapshot::is_conserved));
    }

    #[test]
    fn instant_moves_past_the_barrier_are_rejected() {
        // A delayed jump lands beyond the barrier, then instant moves run away.
        let spec = Walk2DSpec::new(
            vec![
                MoveRule::new(3, 0, 1, p(1, 2)),
                MoveRule::new(1, 0, 0, p(1, 2)),
            ],
            Some(BarrierSpec::new(2).unwrap()),
        )
        .unwrap();
        assert!(walk2d_snapshot(&spec, 0).is_ok());
        assert!(matches!(
            walk2d_snapshot(&spec, 1),
            Err(Error::BarrierEscape(3, 0))
        ));
    }

    #[test]
    fn race_examples() {
        let snap = gosper_race_snapshot(&p(1, 2), 1, 1).unwrap();
        assert_eq!(
            snap.get(&StateLabel::RaceWon { heads: 1, tails: 0 }),
            r(1, 2)
        );
        assert_eq!(
            snap.get(&StateLabel::RaceWon { heads: 0, tails: 1 }),
            r(1, 2)
        );
        assert!(snap.absorbed.is_one());

        // p = 1/3, N = 2: heads wins as HH, or with one tail among the first two flips.
        let snap = gosper_race_snapshot(&p(1, 3), 2, 3).unwrap();
        assert_eq!(
            snap.get(&StateLabel::RaceWon { heads: 2, tails: 0 }),
            r(1, 9)
        );
        assert_eq!(
            snap.get(&StateLabel::RaceWon { heads: 2, tails: 1 }),
            r(2, 1) * r(1, 9) * r(2, 3)
        );
        assert!(snap.absorbed.is_one());

        let snap = gosper_race_snapshot(&p(1, 1), 4, 7).unwrap();
        assert_eq!(snap.mass.len(), 1);
        assert!(snap
            .get(&StateLabel::RaceWon { heads: 4, tails: 0 })
            .is_one());

        let partial = gosper_race_snapshot(&p(1, 2), 3, 2).unwrap();
        assert!(partial.absorbed.is_zero());
        assert!(partial.is_conserved());
        assert!(gosper_race_snapshot(&p(1, 2), 0, 3).is_err());
    }
}

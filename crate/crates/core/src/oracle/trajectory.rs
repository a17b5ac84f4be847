//! Brute-force enumeration of every trajectory observable at `m τ⁺`.

use std::collections::BTreeMap;

use super::StateLabel;
use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::model::{ChainSpec, LatticePoint, Model, Walk2DSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    /// Chain: skip to the next node without delay.
    Instant,
    /// Chain: enter tower level 1.
    Delay,
    /// Chain: climb to the given tower level.
    Ascend(u32),
    /// Chain: leave the tower for the next node.
    Exit,
    /// Walk: take move `i`.
    Move(usize),
    /// Walk: arrived at the snapshot tick, waiting on a delayed move.
    Rest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub choice: Choice,
    pub prob: Rational,
    pub duration: u32,
}

/// A path of choices; the last time-consuming step may still be in flight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Sum of step durations.
    pub total_time: u32,
    pub end_state: StateLabel,
}

impl Trajectory {
    pub fn probability(&self) -> Rational {
        self.steps.iter().map(|s| s.prob.clone()).product()
    }
}

struct Collector {
    cap: usize,
    out: Vec<Trajectory>,
}

impl Collector {
    fn finish(&mut self, steps: &[Step], end_state: StateLabel) -> Result<()> {
        if self.out.len() >= self.cap {
            return Err(Error::CapExceeded(self.cap));
        }
        let total_time = steps.iter().map(|s| s.duration).sum();
        self.out.push(Trajectory {
            steps: steps.to_vec(),
            total_time,
            end_state,
        });
        Ok(())
    }
}

fn with_step<F>(steps: &mut Vec<Step>, step: Step, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<Step>) -> Result<()>,
{
    steps.push(step);
    let result = f(steps);
    steps.pop();
    result
}

struct ChainWalker<'a> {
    spec: &'a ChainSpec,
    m: u32,
}

impl ChainWalker<'_> {
    fn at_node(&self, k: u32, t: u32, steps: &mut Vec<Step>, sink: &mut Collector) -> Result<()> {
        if k == self.spec.n_states {
            return sink.finish(steps, StateLabel::Terminal);
        }
        let p1 = self.spec.prob(1);
        let instant = p1.complement();
        if !instant.is_zero() {
            let step = Step {
                choice: Choice::Instant,
                prob: instant,
                duration: 0,
            };
            with_step(steps, step, |s| self.at_node(k + 1, t, s, sink))?;
        }
        if !p1.is_zero() {
            let step = Step {
                choice: Choice::Delay,
                prob: p1.clone(),
                duration: 1,
            };
            with_step(steps, step, |s| self.in_tower(k, 1, t, s, sink))?;
        }
        Ok(())
    }

    /// Occupying tower level `r` above `c_k` during `(t, t + 1]`.
    fn in_tower(
        &self,
        k: u32,
        r: u32,
        t: u32,
        steps: &mut Vec<Step>,
        sink: &mut Collector,
    ) -> Result<()> {
        if t + 1 > self.m {
            return sink.finish(
                steps,
                StateLabel::Tower {
                    position: k,
                    level: r,
                },
            );
        }
        let (up, exit) = if r < self.spec.levels {
            let up = self.spec.prob(r + 1);
            (up.clone(), up.complement())
        } else {
            (Rational::zero(), Rational::one())
        };
        if !up.is_zero() {
            let step = Step {
                choice: Choice::Ascend(r + 1),
                prob: up,
                duration: 1,
            };
            with_step(steps, step, |s| self.in_tower(k, r + 1, t + 1, s, sink))?;
        }
        if !exit.is_zero() {
            let step = Step {
                choice: Choice::Exit,
                prob: exit,
                duration: 0,
            };
            with_step(steps, step, |s| self.at_node(k + 1, t + 1, s, sink))?;
        }
        Ok(())
    }
}

struct LatticeWalker<'a> {
    spec: &'a Walk2DSpec,
    m: u32,
    delayed_total: Rational,
    has_instant: bool,
}

impl LatticeWalker<'_> {
    fn at_point(
        &self,
        pt: LatticePoint,
        t: u32,
        steps: &mut Vec<Step>,
        sink: &mut Collector,
    ) -> Result<()> {
        if let Some(barrier) = self.spec.barrier {
            if barrier.contains(pt) {
                return sink.finish(steps, StateLabel::Barrier(pt));
            }
            let n = barrier.size as i64;
            if self.has_instant && (pt.h > n || pt.v > n) {
                return Err(Error::BarrierEscape(pt.h, pt.v));
            }
        }
        for (i, mv) in self.spec.moves.iter().enumerate() {
            if mv.prob.value().is_zero() {
                continue;
            }
            let step = Step {
                choice: Choice::Move(i),
                prob: mv.prob.value().clone(),
                duration: mv.duration,
            };
            let next = pt.offset(mv.dx, mv.dy);
            if mv.is_instant() {
                with_step(steps, step, |s| self.at_point(next, t, s, sink))?;
            } else if t < self.m {
                if t + mv.duration > self.m {
                    let end = StateLabel::Lattice {
                        point: pt,
                        pending: Some(i),
                    };
                    with_step(steps, step, |s| sink.finish(s, end))?;
                } else {
                    with_step(steps, step, |s| {
                        self.at_point(next, t + mv.duration, s, sink)
                    })?;
                }
            }
        }
        if t == self.m && !self.delayed_total.is_zero() {
            let step = Step {
                choice: Choice::Rest,
                prob: self.delayed_total.clone(),
                duration: 0,
            };
            let end = StateLabel::Lattice {
                point: pt,
                pending: None,
            };
            with_step(steps, step, |s| sink.finish(s, end))?;
        }
        Ok(())
    }
}

/// Every trajectory observable at `m τ⁺`, with zero-probability branches
/// pruned. Fails once more than `cap` trajectories are produced.
pub fn enumerate_trajectories(model: &Model, m: u32, cap: usize) -> Result<Vec<Trajectory>> {
    let mut sink = Collector {
        cap,
        out: Vec::new(),
    };
    let mut steps = Vec::new();
    match model {
        Model::Chain(spec) => {
            spec.check()?;
            ChainWalker { spec, m }.at_node(1, 0, &mut steps, &mut sink)?;
        }
        Model::Walk2D(spec) => {
            spec.check()?;
            let walker = LatticeWalker {
                spec,
                m,
                delayed_total: spec
                    .moves
                    .iter()
                    .filter(|mv| !mv.is_instant())
                    .map(|mv| mv.prob.value())
                    .sum(),
                has_instant: spec.has_instant_moves(),
            };
            walker.at_point(LatticePoint::ORIGIN, 0, &mut steps, &mut sink)?;
        }
    }
    Ok(sink.out)
}

/// Total trajectory probability per end state.
pub fn aggregate(trajectories: &[Trajectory]) -> BTreeMap<StateLabel, Rational> {
    let mut out: BTreeMap<StateLabel, Rational> = BTreeMap::new();
    for tr in trajectories {
        *out.entry(tr.end_state).or_insert_with(Rational::zero) += tr.probability();
    }
    out
}

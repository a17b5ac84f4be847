//! Declarative descriptions of the walk families: delayed chains with
//! probability towers, and lattice walks built from move rules.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{Probability, Rational};
use crate::error::{Error, Result};

/// An `n_states`-node chain `c_1 .. c_N` whose transitions may be delayed by
/// a tower of `levels` unit-time levels. Level `r` is entered with
/// probability `p_1 * .. * p_r`; `p_1` alone decides delayed vs. instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_states: u32,
    pub levels: u32,
    pub level_probs: Vec<Probability>,
}

impl ChainSpec {
    /// Builds and validates a chain; `levels` is taken from `probs.len()`.
    pub fn new(n_states: u32, probs: Vec<Probability>) -> Result<Self> {
        validate_chain(ChainSpec {
            n_states,
            levels: probs.len() as u32,
            level_probs: probs,
        })
    }

    /// Single-level chain with delay probability `p`.
    pub fn simple(n_states: u32, p: Probability) -> Result<Self> {
        Self::new(n_states, vec![p])
    }

    pub fn check(&self) -> Result<()> {
        if self.n_states < 2 {
            return Err(Error::InvalidModel(format!(
                "n_states = {} < 2",
                self.n_states
            )));
        }
        if self.levels < 1 {
            return Err(Error::InvalidModel("levels must be at least 1".into()));
        }
        if self.level_probs.len() != self.levels as usize {
            return Err(Error::InvalidModel(format!(
                "length mismatch: {} levels but {} probabilities",
                self.levels,
                self.level_probs.len()
            )));
        }
        Ok(())
    }

    pub fn prob(&self, level: u32) -> &Rational {
        self.level_probs[level as usize - 1].value()
    }
}

/// Returns the spec unchanged if it is well formed, otherwise the first
/// violated constraint.
pub fn validate_chain(spec: ChainSpec) -> Result<ChainSpec> {
    spec.check()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub h: i64,
    pub v: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { h: 0, v: 0 };

    pub fn new(h: i64, v: i64) -> Self {
        LatticePoint { h, v }
    }

    pub fn offset(self, dx: i64, dy: i64) -> Self {
        LatticePoint {
            h: self.h + dx,
            v: self.v + dy,
        }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.h, self.v)
    }
}

/// One move of a lattice walk: signed displacement, travel time, probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRule {
    pub dx: i64,
    pub dy: i64,
    #[serde(rename = "t")]
    pub duration: u32,
    #[serde(rename = "p")]
    pub prob: Probability,
}

impl MoveRule {
    pub fn new(dx: i64, dy: i64, duration: u32, prob: Probability) -> Self {
        MoveRule {
            dx,
            dy,
            duration,
            prob,
        }
    }

    pub fn is_instant(&self) -> bool {
        self.duration == 0
    }
}

/// The absorbing barrier `{(N, v) : 0 <= v < N} ∪ {(h, N) : 0 <= h < N}`.
/// The corner `(N, N)` is not part of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BarrierSpec {
    pub size: u32,
}

impl BarrierSpec {
    pub fn new(size: u32) -> Result<Self> {
        if size < 1 {
            return Err(Error::InvalidModel(
                "barrier size must be at least 1".into(),
            ));
        }
        Ok(BarrierSpec { size })
    }

    pub fn contains(&self, point: LatticePoint) -> bool {
        barrier_contains(*self, point)
    }

    /// Barrier cells in a fixed order: the vertical side, then the horizontal.
    pub fn cells(&self) -> Vec<LatticePoint> {
        let n = self.size as i64;
        (0..n)
            .map(|v| LatticePoint::new(n, v))
            .chain((0..n).map(|h| LatticePoint::new(h, n)))
            .collect()
    }
}

pub fn barrier_contains(barrier: BarrierSpec, point: LatticePoint) -> bool {
    let n = barrier.size as i64;
    (point.h == n && (0..n).contains(&point.v)) || (point.v == n && (0..n).contains(&point.h))
}

/// A lattice walk from the origin. Moves with zero duration resolve within
/// the tick and are only allowed under a barrier, moving towards it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Walk2DSpec {
    pub moves: Vec<MoveRule>,
    pub barrier: Option<BarrierSpec>,
}

impl Walk2DSpec {
    pub fn new(moves: Vec<MoveRule>, barrier: Option<BarrierSpec>) -> Result<Self> {
        validate_walk2d(Walk2DSpec { moves, barrier })
    }

    /// Unit jumps right, left, up, down (in that order), each taking one tick.
    pub fn unit_cross(probs: [Probability; 4]) -> Result<Self> {
        let [p1, p2, p3, p4] = probs;
        Self::new(
            vec![
                MoveRule::new(1, 0, 1, p1),
                MoveRule::new(-1, 0, 1, p2),
                MoveRule::new(0, 1, 1, p3),
                MoveRule::new(0, -1, 1, p4),
            ],
            None,
        )
    }

    pub fn uniform_cross() -> Self {
        let q = Probability::ratio(1, 4);
        Self::unit_cross([q.clone(), q.clone(), q.clone(), q]).expect("uniform walk is valid")
    }

    /// The delayed/instant right-up walk under a barrier: `p1` right with
    /// delay, `p2` right instantly, `p3` up with delay, `p4` up instantly.
    pub fn delayed_quadrant(probs: [Probability; 4], barrier: BarrierSpec) -> Result<Self> {
        let [p1, p2, p3, p4] = probs;
        Self::new(
            vec![
                MoveRule::new(1, 0, 1, p1),
                MoveRule::new(1, 0, 0, p2),
                MoveRule::new(0, 1, 1, p3),
                MoveRule::new(0, 1, 0, p4),
            ],
            Some(barrier),
        )
    }

    /// A one-dimensional delayed chain: right with delay (`p`) or right
    /// instantly (`1 - p`), absorbed at `h = barrier`.
    pub fn delayed_line(p: Probability, barrier: BarrierSpec) -> Result<Self> {
        let q = p.complement();
        Self::new(
            vec![MoveRule::new(1, 0, 1, p), MoveRule::new(1, 0, 0, q)],
            Some(barrier),
        )
    }

    pub fn has_instant_moves(&self) -> bool {
        self.moves.iter().any(MoveRule::is_instant)
    }

    pub fn check(&self) -> Result<()> {
        if self.moves.is_empty() {
            return Err(Error::InvalidModel("walk has no moves".into()));
        }
        let total: Rational = self.moves.iter().map(|m| m.prob.value()).sum();
        if !total.is_one() {
            return Err(Error::InvalidModel(format!(
                "move probabilities sum to {total}, not 1"
            )));
        }
        for (i, mv) in self
            .moves
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_instant())
        {
            if self.barrier.is_none() {
                return Err(Error::InvalidModel(format!(
                    "move {i} has zero duration but the walk has no barrier"
                )));
            }
            if mv.dx < 0 || mv.dy < 0 || (mv.dx == 0 && mv.dy == 0) {
                return Err(Error::InvalidModel(format!(
                    "zero-duration move {i} must advance towards the barrier"
                )));
            }
        }
        Ok(())
    }
}

pub fn validate_walk2d(spec: Walk2DSpec) -> Result<Walk2DSpec> {
    spec.check()?;
    Ok(spec)
}

/// On-disk model description.
///
/// ```json
/// {"chain": {"n": 28, "probs": ["1/10"]}}
/// {"walk2d": {"moves": [{"dx": 1, "dy": 0, "t": 1, "p": "1/4"}], "barrier": null}}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFile {
    Chain {
        n: u32,
        probs: Vec<Probability>,
    },
    Walk2d {
        moves: Vec<MoveRule>,
        barrier: Option<u32>,
    },
}

/// A validated model loaded from a [`ModelFile`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Chain(ChainSpec),
    Walk2D(Walk2DSpec),
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Model> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
        file.into_model()
    }

    pub fn into_model(self) -> Result<Model> {
        match self {
            ModelFile::Chain { n, probs } => ChainSpec::new(n, probs).map(Model::Chain),
            ModelFile::Walk2d { moves, barrier } => {
                let barrier = barrier.map(BarrierSpec::new).transpose()?;
                Walk2DSpec::new(moves, barrier).map(Model::Walk2D)
            }
        }
    }
}

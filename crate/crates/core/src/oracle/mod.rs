//! Ground truth for the closed forms: the exact process built from a model
//! and evolved tick by tick in rational arithmetic, plus trajectory
//! enumeration and seeded Monte Carlo.
//!
//! Snapshots are taken at `m τ⁺`: arrivals of tick `m` land first, then all
//! instant transitions are resolved, then the distribution is observed. A
//! walker on a delayed move is recorded at the cell it left.

mod monte_carlo;
mod stepping;
mod trajectory;

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::Rational;
use crate::model::LatticePoint;

pub use monte_carlo::{mc_estimate, McEstimate};
pub use stepping::{
    chain_snapshot, chain_snapshots, gosper_race_snapshot, walk2d_snapshot, walk2d_snapshots,
};
pub use trajectory::{aggregate, enumerate_trajectories, Choice, Step, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateLabel {
    /// Tower level `level` above chain node `c_position`.
    Tower { position: u32, level: u32 },
    /// Resting at `point`; `pending` is the move in flight, `None` when the
    /// walker arrived at the snapshot tick itself.
    Lattice {
        point: LatticePoint,
        pending: Option<usize>,
    },
    /// The terminal chain node `c_N`.
    Terminal,
    /// Absorbed at a barrier cell.
    Barrier(LatticePoint),
    /// Coin race still running.
    Race { heads: u32, tails: u32 },
    /// Coin race decided.
    RaceWon { heads: u32, tails: u32 },
}

impl StateLabel {
    pub fn is_absorbing(&self) -> bool {
        matches!(
            self,
            StateLabel::Terminal | StateLabel::Barrier(_) | StateLabel::RaceWon { .. }
        )
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Tower { position, level } => write!(f, "tower({position},{level})"),
            StateLabel::Lattice {
                point,
                pending: None,
            } => write!(f, "lattice{point}"),
            StateLabel::Lattice {
                point,
                pending: Some(i),
            } => {
                write!(f, "lattice({},{};pending={i})", point.h, point.v)
            }
            StateLabel::Terminal => write!(f, "terminal"),
            StateLabel::Barrier(point) => write!(f, "barrier{point}"),
            StateLabel::Race { heads, tails } | StateLabel::RaceWon { heads, tails } => {
                write!(f, "race({heads},{tails})")
            }
        }
    }
}

impl Serialize for StateLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Exact occupancy at `m τ⁺`. `mass` holds every label with non-zero
/// probability, absorbing ones included; `absorbed` is their total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub time: u32,
    pub mass: BTreeMap<StateLabel, Rational>,
    pub absorbed: Rational,
}

impl Snapshot {
    pub(crate) fn new(time: u32, mass: BTreeMap<StateLabel, Rational>) -> Self {
        let mass: BTreeMap<_, _> = mass.into_iter().filter(|(_, q)| !q.is_zero()).collect();
        let absorbed = mass
            .iter()
            .filter(|(l, _)| l.is_absorbing())
            .map(|(_, q)| q)
            .sum();
        Snapshot {
            time,
            mass,
            absorbed,
        }
    }

    pub fn get(&self, label: &StateLabel) -> Rational {
        self.mass.get(label).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total mass, transient plus absorbed.
    pub fn total(&self) -> Rational {
        self.mass.values().sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.total().is_one() && self.mass.values().all(|q| !q.is_negative())
    }

    /// Transient lattice mass summed over the pending move.
    pub fn point_marginals(&self) -> BTreeMap<LatticePoint, Rational> {
        let mut out: BTreeMap<LatticePoint, Rational> = BTreeMap::new();
        for (label, q) in &self.mass {
            if let StateLabel::Lattice { point, .. } = label {
                *out.entry(*point).or_insert_with(Rational::zero) += q;
            }
        }
        out
    }
}

impl Serialize for Snapshot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            label: &'a StateLabel,
            mass: &'a Rational,
        }
        let states: Vec<Entry> = self
            .mass
            .iter()
            .map(|(label, mass)| Entry { label, mass })
            .collect();
        let mut s = serializer.serialize_struct("Snapshot", 3)?;
        s.serialize_field("m", &self.time)?;
        s.serialize_field("states", &states)?;
        s.serialize_field("absorbed", &self.absorbed)?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_rendering() {
        let pt = LatticePoint::new(1, -2);
        assert_eq!(
            StateLabel::Tower {
                position: 3,
                level: 2
            }
            .to_string(),
            "tower(3,2)"
        );
        assert_eq!(
            StateLabel::Lattice {
                point: pt,
                pending: None
            }
            .to_string(),
            "lattice(1,-2)"
        );
        assert_eq!(
            StateLabel::Lattice {
                point: pt,
                pending: Some(2)
            }
            .to_string(),
            "lattice(1,-2;pending=2)"
        );
        assert_eq!(StateLabel::Barrier(pt).to_string(), "barrier(1,-2)");
        assert_eq!(
            StateLabel::RaceWon { heads: 4, tails: 0 }.to_string(),
            "race(4,0)"
        );
        assert!(StateLabel::Terminal.is_absorbing());
        assert!(!StateLabel::Race { heads: 0, tails: 0 }.is_absorbing());
    }

    #[test]
    fn snapshot_json_shape() {
        let mut mass = BTreeMap::new();
        mass.insert(
            StateLabel::Tower {
                position: 1,
                level: 1,
            },
            Rational::new(1, 2),
        );
        mass.insert(StateLabel::Terminal, Rational::new(1, 2));
        let snap = Snapshot::new(0, mass);
        assert_eq!(
            serde_json::to_string(&snap).unwrap(),
            r#"{"m":0,"states":[{"label":"tower(1,1)","mass":"1/2"},{"label":"terminal","mass":"1/2"}],"absorbed":"1/2"}"#
        );
    }
}

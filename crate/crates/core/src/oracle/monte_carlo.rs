use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::StateLabel;
use crate::error::{Error, Result};
use crate::model::{ChainSpec, LatticePoint, Model, Walk2DSpec};

/// Empirical end-state frequencies from seeded simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub time: u32,
    pub samples: u64,
    pub frequencies: BTreeMap<StateLabel, f64>,
}

impl McEstimate {
    pub fn frequency(&self, label: &StateLabel) -> f64 {
        self.frequencies.get(label).copied().unwrap_or(0.0)
    }
}

impl Serialize for McEstimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            label: &'a StateLabel,
            frequency: f64,
        }
        let states: Vec<Entry> = self
            .frequencies
            .iter()
            .map(|(label, &frequency)| Entry { label, frequency })
            .collect();
        let mut s = serializer.serialize_struct("McEstimate", 3)?;
        s.serialize_field("m", &self.time)?;
        s.serialize_field("samples", &self.samples)?;
        s.serialize_field("states", &states)?;
        s.end()
    }
}

fn sample_chain(spec: &ChainSpec, m: u32, rng: &mut ChaCha8Rng) -> StateLabel {
    let probs: Vec<f64> = spec
        .level_probs
        .iter()
        .map(|p| p.value().to_f64())
        .collect();
    let (mut k, mut t) = (1u32, 0u32);
    loop {
        if k == spec.n_states {
            return StateLabel::Terminal;
        }
        if rng.gen::<f64>() >= probs[0] {
            k += 1;
            continue;
        }
        let mut level = 1;
        loop {
            if t + 1 > m {
                return StateLabel::Tower { position: k, level };
            }
            t += 1;
            if level < spec.levels && rng.gen::<f64>() < probs[level as usize] {
                level += 1;
            } else {
                break;
            }
        }
        k += 1;
    }
}

fn sample_walk(spec: &Walk2DSpec, m: u32, rng: &mut ChaCha8Rng) -> Result<StateLabel> {
    let probs: Vec<f64> = spec
        .moves
        .iter()
        .map(|mv| mv.prob.value().to_f64())
        .collect();
    let has_instant = spec.has_instant_moves();
    let (mut pt, mut t) = (LatticePoint::ORIGIN, 0u32);
    loop {
        if let Some(barrier) = spec.barrier {
            if barrier.contains(pt) {
                return Ok(StateLabel::Barrier(pt));
            }
            let n = barrier.size as i64;
            if has_instant && (pt.h > n || pt.v > n) {
                return Err(Error::BarrierEscape(pt.h, pt.v));
            }
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        // Fall back to the last positive move if rounding leaves u uncovered.
        let mut chosen = probs
            .iter()
            .rposition(|&q| q > 0.0)
            .expect("some move has mass");
        for (i, &q) in probs.iter().enumerate() {
            acc += q;
            if u < acc && q > 0.0 {
                chosen = i;
                break;
            }
        }
        let mv = &spec.moves[chosen];
        if mv.is_instant() {
            pt = pt.offset(mv.dx, mv.dy);
        } else if t == m {
            return Ok(StateLabel::Lattice {
                point: pt,
                pending: None,
            });
        } else if t + mv.duration > m {
            return Ok(StateLabel::Lattice {
                point: pt,
                pending: Some(chosen),
            });
        } else {
            t += mv.duration;
            pt = pt.offset(mv.dx, mv.dy);
        }
    }
}

/// Simulates `samples` independent runs to time `m` with a ChaCha8 stream
/// seeded from `seed`; identical inputs give identical output.
pub fn mc_estimate(model: &Model, m: u32, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<StateLabel, u64> = BTreeMap::new();
    for _ in 0..samples {
        let label = match model {
            Model::Chain(spec) => {
                spec.check()?;
                sample_chain(spec, m, &mut rng)
            }
            Model::Walk2D(spec) => {
                spec.check()?;
                sample_walk(spec, m, &mut rng)?
            }
        };
        *counts.entry(label).or_default() += 1;
    }
    let frequencies = counts
        .into_iter()
        .map(|(label, c)| (label, c as f64 / samples as f64))
        .collect();
    Ok(McEstimate {
        time: m,
        samples,
        frequencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Probability;

    #[test]
    fn seeded_runs_repeat() {
        let model = Model::Walk2D(Walk2DSpec::uniform_cross());
        let a = mc_estimate(&model, 3, 2_000, 11).unwrap();
        let b = mc_estimate(&model, 3, 2_000, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, mc_estimate(&model, 3, 2_000, 12).unwrap());
    }

    #[test]
    fn two_state_chain_concentrates() {
        let model = Model::Chain(ChainSpec::simple(2, Probability::ratio(1, 2)).unwrap());
        let est = mc_estimate(&model, 0, 100_000, 7).unwrap();
        let f = est.frequency(&StateLabel::Tower {
            position: 1,
            level: 1,
        });
        assert!((f - 0.5).abs() < 0.007, "{f}");
    }

    #[test]
    fn certain_chain_is_deterministic() {
        let model = Model::Chain(ChainSpec::simple(4, Probability::one()).unwrap());
        for m in 0..5 {
            for seed in 0..3 {
                let est = mc_estimate(&model, m, 500, seed).unwrap();
                assert_eq!(est.frequencies.len(), 1);
                let label = if m >= 3 {
                    StateLabel::Terminal
                } else {
                    StateLabel::Tower {
                        position: m + 1,
                        level: 1,
                    }
                };
                assert_eq!(est.frequency(&label), 1.0);
            }
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let model = Model::Walk2D(Walk2DSpec::uniform_cross());
        assert!(mc_estimate(&model, 1, 0, 1).is_err());
    }
}

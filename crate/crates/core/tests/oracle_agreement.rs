use proptest::prelude::*;
use walkident::closed_form::{
    chain2d_barrier_prob, chain2d_point_prob, walk2d_state_prob, ChainEvaluator, CoefficientMode,
};
use walkident::oracle::{
    aggregate, chain_snapshots, enumerate_trajectories, walk2d_snapshot, walk2d_snapshots,
};
use walkident::{
    check_identity, BarrierSpec, ChainSpec, IdentityId, IdentityParams, LatticePoint, Model,
    MoveRule, Probability, StateLabel, Walk2DSpec,
};

fn p(n: i64, d: i64) -> Probability {
    Probability::ratio(n, d)
}

#[test]
fn delayed_line_reproduces_chain() {
    for n in 2..=8u32 {
        for prob in [p(0, 1), p(1, 10), p(1, 2), p(9, 10), p(1, 1)] {
            let chain =
                chain_snapshots(&ChainSpec::simple(n, prob.clone()).unwrap(), 2 * n).unwrap();
            let line = Walk2DSpec::delayed_line(prob, BarrierSpec::new(n - 1).unwrap()).unwrap();
            let walk = walk2d_snapshots(&line, 2 * n).unwrap();
            for (c, w) in chain.iter().zip(&walk) {
                let mapped = c
                    .mass
                    .iter()
                    .map(|(label, q)| {
                        let label = match *label {
                            StateLabel::Tower { position, level: 1 } => StateLabel::Lattice {
                                point: LatticePoint::new(position as i64 - 1, 0),
                                pending: None,
                            },
                            StateLabel::Terminal => {
                                StateLabel::Barrier(LatticePoint::new(n as i64 - 1, 0))
                            }
                            other => panic!("unexpected {other}"),
                        };
                        (label, q.clone())
                    })
                    .collect();
                assert_eq!(w.mass, mapped, "N={n} m={}", c.time);
            }
        }
    }
}

#[test]
fn snapshots_conserve_mass_to_fifty() {
    let chains = [
        ChainSpec::simple(8, p(1, 3)).unwrap(),
        ChainSpec::new(6, vec![p(1, 2), p(3, 4), p(1, 4)]).unwrap(),
        ChainSpec::new(5, vec![p(1, 1), p(1, 1), p(1, 1), p(1, 2)]).unwrap(),
    ];
    for spec in &chains {
        assert!(chain_snapshots(spec, 50)
            .unwrap()
            .iter()
            .all(|s| s.is_conserved()));
    }
    let quad = Walk2DSpec::delayed_quadrant(
        [p(1, 5), p(1, 5), p(2, 5), p(1, 5)],
        BarrierSpec::new(6).unwrap(),
    )
    .unwrap();
    assert!(walk2d_snapshots(&quad, 50)
        .unwrap()
        .iter()
        .all(|s| s.is_conserved()));
    let slow = Walk2DSpec::new(
        vec![
            MoveRule::new(1, 0, 3, p(1, 2)),
            MoveRule::new(0, -1, 2, p(1, 2)),
        ],
        None,
    )
    .unwrap();
    assert!(walk2d_snapshots(&slow, 50)
        .unwrap()
        .iter()
        .all(|s| s.is_conserved()));
    assert!(walk2d_snapshots(&Walk2DSpec::uniform_cross(), 25)
        .unwrap()
        .iter()
        .all(|s| s.is_conserved()));
}

#[test]
fn multilevel_chain_grid_matches_oracle() {
    let grid = [p(0, 1), p(1, 2), p(1, 1), p(1, 3)];
    for levels in 2..=3 {
        for probs in walkident::SweepGrid::product(&grid, levels) {
            let spec = ChainSpec::new(5, probs).unwrap();
            let eval = ChainEvaluator::new(&spec).unwrap();
            let snaps = chain_snapshots(&spec, 10).unwrap();
            for (m, snap) in (0u32..).zip(&snaps) {
                for k in 1..5 {
                    for r in 1..=levels as u32 {
                        assert_eq!(
                            eval.level_prob(k, r, m).unwrap(),
                            snap.get(&StateLabel::Tower {
                                position: k,
                                level: r
                            })
                        );
                    }
                }
                assert_eq!(eval.absorbed_cdf(m), snap.absorbed);
            }
        }
    }
}

#[test]
fn corrected_quadrant_matches_oracle() {
    let vectors = [
        [p(1, 4), p(1, 4), p(1, 4), p(1, 4)],
        [p(1, 10), p(2, 10), p(3, 10), p(4, 10)],
        [p(1, 2), p(0, 1), p(1, 2), p(0, 1)],
        [p(0, 1), p(1, 2), p(0, 1), p(1, 2)],
    ];
    for probs in vectors {
        for n in 1..=4u32 {
            let barrier = BarrierSpec::new(n).unwrap();
            let spec = Walk2DSpec::delayed_quadrant(probs.clone(), barrier).unwrap();
            for m in 0..=2 * n {
                let snap = walk2d_snapshot(&spec, m).unwrap();
                for h in 0..n as i64 {
                    for v in 0..n as i64 {
                        let pt = LatticePoint::new(h, v);
                        assert_eq!(
                            chain2d_point_prob(&probs, pt, m, CoefficientMode::Corrected).unwrap(),
                            snap.get(&StateLabel::Lattice {
                                point: pt,
                                pending: None
                            })
                        );
                    }
                }
                for pt in barrier.cells() {
                    assert_eq!(
                        chain2d_barrier_prob(&probs, barrier, pt, m, CoefficientMode::Corrected)
                            .unwrap(),
                        snap.get(&StateLabel::Barrier(pt))
                    );
                }
            }
        }
    }
}

#[test]
fn higher_level_identities_match_oracle() {
    let cases = [
        (IdentityId::Eq2TwoNode, vec![p(1, 2), p(1, 3)]),
        (IdentityId::ThreeNode, vec![p(1, 2), p(1, 2), p(1, 2)]),
        (
            IdentityId::MultiLevel(4),
            vec![p(3, 4), p(1, 4), p(1, 1), p(1, 2)],
        ),
    ];
    for (id, probs) in cases {
        let spec = ChainSpec::new(6, probs).unwrap();
        for m in 0..=12 {
            let params = IdentityParams::Chain {
                spec: spec.clone(),
                m,
            };
            let rep = check_identity(id, &params, CoefficientMode::Literal).unwrap();
            assert!(rep.matches_oracle(), "{id} m={m}: {:?}", rep.oracle_diffs);
            assert!(rep.holds);
            assert_eq!(rep.range_independent, Some(true));
        }
    }
}

#[test]
fn trajectories_agree_with_stepping_on_mixed_durations() {
    let spec = Walk2DSpec::new(
        vec![
            MoveRule::new(1, 0, 2, p(1, 3)),
            MoveRule::new(0, 1, 1, p(1, 3)),
            MoveRule::new(-1, -1, 3, p(1, 3)),
        ],
        None,
    )
    .unwrap();
    for m in 0..=8 {
        let trs = enumerate_trajectories(&Model::Walk2D(spec.clone()), m, 1_000_000).unwrap();
        let snap = walk2d_snapshot(&spec, m).unwrap();
        assert_eq!(aggregate(&trs), snap.mass);
        for (label, q) in &snap.mass {
            if let StateLabel::Lattice { point, pending } = *label {
                assert_eq!(&walk2d_state_prob(&spec, point, pending, m).unwrap(), q);
            }
        }
    }
}

fn small_prob() -> impl Strategy<Value = Probability> {
    (0i64..=4).prop_map(|a| p(a, 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_chains_match_oracle(
        probs in prop::collection::vec(small_prob(), 1..=4),
        n in 2u32..=6,
        m in 0u32..=9,
    ) {
        let spec = ChainSpec::new(n, probs).unwrap();
        let trs = enumerate_trajectories(&Model::Chain(spec.clone()), m, 1_000_000).unwrap();
        let snap = chain_snapshots(&spec, m).unwrap().pop().unwrap();
        prop_assert!(snap.is_conserved());
        prop_assert_eq!(aggregate(&trs), snap.mass.clone());
        let eval = ChainEvaluator::new(&spec).unwrap();
        for k in 1..n {
            for r in 1..=spec.levels {
                prop_assert_eq!(
                    eval.level_prob(k, r, m).unwrap(),
                    snap.get(&StateLabel::Tower { position: k, level: r })
                );
            }
        }
        prop_assert_eq!(eval.absorbed_cdf(m), snap.absorbed);
    }
}

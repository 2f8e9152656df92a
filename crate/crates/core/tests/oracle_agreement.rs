//! Seeded randomized comparisons against the brute-force oracles.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tamper_core::cmin::{compute_cmin, PairState};
use tamper_core::diagnoser::{verify_diagnosability, FaultLabel};
use tamper_core::estimator::{estimate_least_cost, estimate_via_product};
use tamper_core::{AttackModel, PlantNfa, Symbol};
use tamper_oracle::gen::{random_model, random_plant, random_word, PlantShape};
use tamper_oracle::{
    antichain, oracle_cmin, oracle_diagnosable, oracle_ending_states, oracle_estimate,
    reachable_costs, OracleBudget, Twin,
};

fn faults(g: &PlantNfa) -> BTreeSet<Symbol> {
    g.fault_symbols().collect()
}

fn twin(s: PairState) -> Twin {
    (
        s.left,
        s.left_label == FaultLabel::F,
        s.right,
        s.right_label == FaultLabel::F,
    )
}

#[test]
fn estimates_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = PlantShape {
        well_formed: false,
        density: 0.25,
        ..PlantShape::default()
    };
    for _ in 0..300 {
        let g = random_plant(&mut rng, shape);
        let m = random_model(&mut rng, &g, 3, 0.4);
        let w = random_word(&mut rng, &g, 3);
        for budget in 0..=4 {
            let est = estimate_least_cost(&g, &m, &w, budget).unwrap();
            let expected = oracle_estimate(&g, &m, &w, budget, OracleBudget::default()).unwrap();
            assert_eq!(est.entries, expected, "budget {budget}");
            assert_eq!(
                estimate_via_product(&g, &m, &w, budget).unwrap().entries,
                expected
            );
        }
    }
}

#[test]
fn classical_diagnosability_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let empty = AttackModel::empty();
    let mut verdicts = [0usize; 2];
    for _ in 0..150 {
        let g = random_plant(&mut rng, PlantShape::default());
        let ours = verify_diagnosability(&g, &empty, &faults(&g), 0)
            .unwrap()
            .diagnosable;
        let oracle =
            oracle_diagnosable(&g, &empty, &faults(&g), 0, OracleBudget::default()).unwrap();
        assert_eq!(ours, oracle);
        verdicts[ours as usize] += 1;
    }
    assert!(verdicts[0] > 0 && verdicts[1] > 0, "{verdicts:?}");
}

#[test]
fn attacked_diagnosability_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let shape = PlantShape {
        max_states: 4,
        ..PlantShape::default()
    };
    let mut verdicts = [0usize; 2];
    for _ in 0..120 {
        let g = random_plant(&mut rng, shape);
        let m = random_model(&mut rng, &g, 2, 0.3);
        for budget in 0..=2 {
            let ours = verify_diagnosability(&g, &m, &faults(&g), budget)
                .unwrap()
                .diagnosable;
            let oracle =
                oracle_diagnosable(&g, &m, &faults(&g), budget, OracleBudget::default()).unwrap();
            assert_eq!(ours, oracle, "budget {budget}");
            verdicts[ours as usize] += 1;
        }
    }
    assert!(verdicts[0] > 0 && verdicts[1] > 0, "{verdicts:?}");
}

#[test]
fn cmin_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let shape = PlantShape {
        max_states: 4,
        ..PlantShape::default()
    };
    let mut found = 0;
    for _ in 0..150 {
        let g = random_plant(&mut rng, shape);
        let m = random_model(&mut rng, &g, 3, 0.3);
        let report = compute_cmin(&g, &m, &faults(&g)).unwrap();
        let xe: BTreeSet<Twin> = report
            .ending_states
            .iter()
            .map(|&i| twin(report.verifier.state(i)))
            .collect();
        assert_eq!(xe, oracle_ending_states(&g, &m, &faults(&g)));
        let expected = oracle_cmin(&g, &m, &faults(&g), OracleBudget::default()).unwrap();
        assert_eq!(report.cmin, expected);
        found += report.cmin.is_some() as usize;
    }
    assert!(found > 0);
}

#[test]
fn pareto_labels_match_exhaustive_costs() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let shape = PlantShape {
        max_states: 3,
        ..PlantShape::default()
    };
    for _ in 0..60 {
        let g = random_plant(&mut rng, shape);
        let m = random_model(&mut rng, &g, 2, 0.3);
        let report = compute_cmin(&g, &m, &faults(&g)).unwrap();
        let v = &report.verifier;
        let limit = (v.len() as u32).saturating_sub(1) * m.max_cost().max(1);
        let reach = reachable_costs(&g, &m, &faults(&g), limit);
        for (i, labels) in report.labels.iter().enumerate() {
            let ours: BTreeSet<(u32, u32)> =
                labels.pairs().iter().map(|p| (p.left, p.right)).collect();
            let all = reach.get(&twin(v.state(i))).cloned().unwrap_or_default();
            assert_eq!(ours, antichain(&all), "state {:?}", v.state(i));
        }
    }
}

#[test]
fn cmin_separates_diagnosability_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let shape = PlantShape {
        max_states: 4,
        ..PlantShape::default()
    };
    for _ in 0..100 {
        let g = random_plant(&mut rng, shape);
        let m = random_model(&mut rng, &g, 2, 0.3);
        let f = faults(&g);
        match compute_cmin(&g, &m, &f).unwrap().cmin {
            Some(c) => {
                assert!(!verify_diagnosability(&g, &m, &f, c).unwrap().diagnosable);
                assert!(
                    !verify_diagnosability(&g, &m, &f, c + 1)
                        .unwrap()
                        .diagnosable
                );
                if c > 0 {
                    assert!(
                        verify_diagnosability(&g, &m, &f, c - 1)
                            .unwrap()
                            .diagnosable
                    );
                }
            }
            None => {
                for budget in 0..=3 {
                    assert!(
                        verify_diagnosability(&g, &m, &f, budget)
                            .unwrap()
                            .diagnosable
                    );
                }
            }
        }
    }
}

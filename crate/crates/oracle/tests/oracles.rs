use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::SeedableRng;
use tamper_core::io::plant_to_json;
use tamper_core::{fixtures, PlantNfa, Symbol};
use tamper_oracle::gen::{random_plant, PlantShape};
use tamper_oracle::{
    antichain, oracle_cmin, oracle_diagnosable, oracle_ending_states, oracle_estimate,
    reach_from_initial, OracleBudget, OracleError,
};

fn faults(g: &PlantNfa) -> BTreeSet<Symbol> {
    g.fault_symbols().collect()
}

fn caps() -> OracleBudget {
    OracleBudget {
        max_states: 7,
        ..OracleBudget::default()
    }
}

#[test]
fn estimate_on_fig1() {
    let g = fixtures::fig1_plant();
    let m = fixtures::table1_attacks(&g);
    let w = g.parse_word("β α α").unwrap();
    let named = |b| -> BTreeMap<String, u32> {
        oracle_estimate(&g, &m, &w, b, caps())
            .unwrap()
            .into_iter()
            .map(|(x, c)| (g.state_name(x).to_string(), c))
            .collect()
    };
    let zero: BTreeMap<String, u32> = [("3".into(), 0), ("4".into(), 0)].into();
    assert_eq!(named(0), zero);
    let two: BTreeMap<String, u32> = [
        ("0".into(), 1),
        ("1".into(), 1),
        ("3".into(), 0),
        ("4".into(), 0),
    ]
    .into();
    assert_eq!(named(2), two);
    let reached = reach_from_initial(&g, &g.parse_word("α β α").unwrap());
    assert_eq!(g.render_set(&reached), "{3,4}");
}

#[test]
fn refuses_oversized_queries() {
    let g = fixtures::fig1_plant();
    let m = fixtures::table1_attacks(&g);
    let w = g.parse_word(&["α"; 12].join(" ")).unwrap();
    assert!(matches!(
        oracle_estimate(&g, &m, &w, 1, OracleBudget::default()),
        Err(OracleError::TooLarge(_))
    ));
}

#[test]
fn verdicts_on_fixtures() {
    let g = fixtures::fig4_plant();
    let m = fixtures::table2_attacks(&g);
    assert!(oracle_diagnosable(&g, &m, &faults(&g), 4, caps()).unwrap());
    assert_eq!(oracle_cmin(&g, &m, &faults(&g), caps()).unwrap(), None);

    let g = fixtures::fig6_plant();
    let m = fixtures::table3_attacks(&g);
    assert!(oracle_diagnosable(&g, &m, &faults(&g), 1, caps()).unwrap());
    assert!(!oracle_diagnosable(&g, &m, &faults(&g), 2, caps()).unwrap());
    assert_eq!(oracle_cmin(&g, &m, &faults(&g), caps()).unwrap(), Some(2));

    let x = |n| g.state(n).unwrap();
    let expected: BTreeSet<_> =
        [(x("3"), true, x("5"), false), (x("5"), false, x("3"), true)].into();
    assert_eq!(oracle_ending_states(&g, &m, &faults(&g)), expected);
}

#[test]
fn antichain_keeps_minimal_pairs() {
    let all: BTreeSet<(u32, u32)> = [(1, 3), (2, 2), (2, 3), (3, 1), (3, 3), (1, 4)].into();
    assert_eq!(antichain(&all), [(1, 3), (2, 2), (3, 1)].into());
}

#[test]
fn generator_is_seeded_and_well_formed() {
    for seed in 0..50 {
        let a = random_plant(&mut StdRng::seed_from_u64(seed), PlantShape::default());
        let b = random_plant(&mut StdRng::seed_from_u64(seed), PlantShape::default());
        assert_eq!(plant_to_json(&a), plant_to_json(&b));
        assert!(a.check_liveness().is_ok());
        assert!(a.check_no_unobservable_cycles().is_ok());
        assert!(a.num_states() <= PlantShape::default().max_states);
    }
}

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tamper_core::attack::{attacked_image, attacker_projection};
use tamper_core::cmin::{compute_cmin, label_work_limit, CostPair, ParetoSet};
use tamper_core::diagnoser::{verify_diagnosability, CostedPlant, FVerifier};
use tamper_core::estimator::estimate_least_cost;
use tamper_core::matching::{CostedObservationDfa, ObservationAutomaton};
use tamper_core::{AttackModel, ObserverDfa, PlantNfa, Symbol};
use tamper_oracle::gen::{random_model, random_plant, random_word, PlantShape};

fn instance(seed: u64, shape: PlantShape) -> (PlantNfa, AttackModel, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_plant(&mut rng, shape);
    let m = random_model(&mut rng, &g, 3, 0.35);
    (g, m, rng)
}

fn loose() -> PlantShape {
    PlantShape {
        well_formed: false,
        density: 0.3,
        ..PlantShape::default()
    }
}

fn faults(g: &PlantNfa) -> BTreeSet<Symbol> {
    g.fault_symbols().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn observer_tracks_reach(seed in any::<u64>()) {
        let (g, _, mut rng) = instance(seed, loose());
        let obs = ObserverDfa::build(&g);
        let w = random_word(&mut rng, &g, 5);
        let direct = g.reach(g.initial(), &w).unwrap();
        match obs.run(&w) {
            Some(set) => prop_assert_eq!(set, &direct),
            None => prop_assert!(direct.is_empty()),
        }
        prop_assert!(obs.states().iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn reach_composes(seed in any::<u64>()) {
        let (g, _, mut rng) = instance(seed, loose());
        let u = random_word(&mut rng, &g, 3);
        let v = random_word(&mut rng, &g, 3);
        let whole: Vec<Symbol> = u.iter().chain(&v).copied().collect();
        let stepwise = g.reach(&g.reach(g.initial(), &u).unwrap(), &v).unwrap();
        prop_assert_eq!(stepwise, g.reach(g.initial(), &whole).unwrap());
    }

    #[test]
    fn observation_dfa_accepts_matching_sequences(seed in any::<u64>(), budget in 0u32..4) {
        let (g, m, mut rng) = instance(seed, loose());
        let w = random_word(&mut rng, &g, 3);
        let gs = ObservationAutomaton::build(&g, &w, &m).unwrap();
        let gsc = CostedObservationDfa::build(&g, &w, &m, budget + 1).unwrap();
        for seq in m.enumerate_matching(&w, budget + 2) {
            prop_assert!(gs.accepts(&seq.labels));
            prop_assert_eq!(attacked_image(&seq.labels), w.clone());
            let end = gsc.run(&seq.labels).unwrap();
            prop_assert_eq!(end.stage, w.len());
            prop_assert_eq!(end.cost, seq.cost.min(budget + 1));
        }
    }

    #[test]
    fn tampering_is_explained_by_matching(seed in any::<u64>(), budget in 0u32..4) {
        let (g, m, mut rng) = instance(seed, loose());
        let w = random_word(&mut rng, &g, 3);
        for (tampered, cost) in m.enumerate_tampered(&w, budget) {
            let explained = m
                .enumerate_matching(&tampered, cost)
                .into_iter()
                .any(|s| s.cost == cost && attacker_projection(&s.labels) == w);
            prop_assert!(explained);
        }
    }

    #[test]
    fn estimate_is_monotone_in_budget(seed in any::<u64>(), budget in 0u32..4) {
        let (g, m, mut rng) = instance(seed, loose());
        let w = random_word(&mut rng, &g, 3);
        let low = estimate_least_cost(&g, &m, &w, budget).unwrap();
        let high = estimate_least_cost(&g, &m, &w, budget + 1).unwrap();
        for (x, c) in &low.entries {
            prop_assert_eq!(high.entries.get(x), Some(c));
        }
        for (x, c) in &high.entries {
            prop_assert!(low.entries.contains_key(x) || *c == budget + 1);
        }
    }

    #[test]
    fn verifier_invariants(seed in any::<u64>(), budget in 0u32..3) {
        let (g, m, _) = instance(seed, PlantShape::default());
        let gm = CostedPlant::build(&g, &m, budget).unwrap();
        let v = FVerifier::build(&gm, &faults(&g));
        for s in v.states() {
            prop_assert!(v.index_of(s.mirrored()).is_some());
        }
        for e in v.edges() {
            let (a, b) = (v.state(e.from), v.state(e.to));
            prop_assert!(a.left_label <= b.left_label && a.right_label <= b.right_label);
        }
    }

    #[test]
    fn non_diagnosability_persists_with_budget(seed in any::<u64>()) {
        let (g, m, _) = instance(seed, PlantShape { max_states: 4, ..PlantShape::default() });
        let f = faults(&g);
        let verdicts: Vec<bool> = (0..4)
            .map(|c| verify_diagnosability(&g, &m, &f, c).unwrap().diagnosable)
            .collect();
        for pair in verdicts.windows(2) {
            prop_assert!(pair[0] || !pair[1]);
        }
        let classical = verify_diagnosability(&g, &AttackModel::empty(), &f, 0).unwrap();
        if !classical.diagnosable {
            prop_assert!(verdicts.iter().all(|d| !d));
        }
    }

    #[test]
    fn counterexamples_are_genuine(seed in any::<u64>(), budget in 0u32..3) {
        let (g, m, _) = instance(seed, PlantShape::default());
        let f = faults(&g);
        let d = verify_diagnosability(&g, &m, &f, budget).unwrap();
        if let Some(cx) = d.counterexample {
            let is_fault = |s: &tamper_core::diagnoser::RunStep| {
                matches!(s.event, tamper_core::diagnoser::MnEvent::Plant(e) if f.contains(&e))
            };
            prop_assert!(cx.faulty.prefix.iter().any(is_fault));
            prop_assert!(!cx.normal.prefix.iter().chain(&cx.normal.cycle).any(is_fault));
            prop_assert!(!cx.faulty.cycle.is_empty());
            for run in [&cx.faulty, &cx.normal] {
                let steps: Vec<_> = run.prefix.iter().chain(&run.cycle).collect();
                for w in steps.windows(2) {
                    prop_assert_eq!(w[0].to, w[1].from);
                }
                if let (Some(first), Some(last)) = (run.cycle.first(), run.cycle.last()) {
                    prop_assert_eq!(first.from, last.to);
                }
                prop_assert!(steps.iter().all(|s| s.to.cost <= budget));
            }
        }
    }

    #[test]
    fn cmin_search_respects_work_bound(seed in any::<u64>()) {
        let (g, m, _) = instance(seed, PlantShape::default());
        let report = compute_cmin(&g, &m, &faults(&g)).unwrap();
        let v = &report.verifier;
        prop_assert!(v.len() <= 4 * g.num_states() * g.num_states());
        prop_assert!(report.label_insertions <= label_work_limit(g.num_states(), m.max_cost()));
        prop_assert!(report.labels.iter().all(ParetoSet::is_antichain));
        prop_assert_eq!(report.cmin.is_some(), !report.ending_states.is_empty());
        let labels_per_state = (g.observable_symbols().count() + 1)
            * (m.max_cost() as usize + 1).pow(2)
            + 3 * g.unobservable_symbols().count();
        for i in 0..v.len() {
            let labels: BTreeSet<_> = v
                .edges_from(i)
                .map(|e| (e.event, e.left_cost, e.right_cost, e.movers))
                .collect();
            prop_assert!(labels.len() <= labels_per_state);
        }
    }

    #[test]
    fn pareto_update_keeps_antichain(pairs in prop::collection::vec((0u32..10, 0u32..10), 1..40)) {
        let mut s = ParetoSet::new();
        for (l, r) in pairs {
            let p = CostPair::new(l, r);
            s.update(p);
            prop_assert!(s.is_antichain());
            prop_assert!(s.pairs().iter().any(|&q| q == p || q.dominates(p)));
        }
    }
}

//! Random small plants and attack models for property tests.

use rand::seq::SliceRandom;
use rand::Rng;
use tamper_core::attack::{AttackModel, Cost};
use tamper_core::automata::{PlantNfa, Symbol};

/// Shape parameters for [`random_plant`].
#[derive(Clone, Copy, Debug)]
pub struct PlantShape {
    pub max_states: usize,
    pub observable: usize,
    /// Add an unobservable non-fault event `u`.
    pub silent: bool,
    /// Add a fault event `f`.
    pub fault: bool,
    /// Every state gets an observable successor and unobservable edges only
    /// go to higher-numbered states, so the plant is live and has no
    /// unobservable cycles.
    pub well_formed: bool,
    /// Probability of each possible transition.
    pub density: f64,
}

impl Default for PlantShape {
    fn default() -> Self {
        PlantShape {
            max_states: 5,
            observable: 2,
            silent: true,
            fault: true,
            well_formed: true,
            density: 0.2,
        }
    }
}

const OBSERVABLE: [&str; 4] = ["a", "b", "c", "d"];

pub fn random_plant(rng: &mut impl Rng, shape: PlantShape) -> PlantNfa {
    let n = rng.gen_range(1..=shape.max_states);
    let states: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let obs: Vec<&str> = OBSERVABLE[..shape.observable.clamp(1, OBSERVABLE.len())].to_vec();
    let mut unobs = Vec::new();
    if shape.silent {
        unobs.push("u");
    }
    if shape.fault {
        unobs.push("f");
    }
    let mut edges: Vec<(usize, &str, usize)> = Vec::new();
    for x in 0..n {
        for &e in obs.iter().chain(&unobs) {
            let silent = unobs.contains(&e);
            for y in 0..n {
                if shape.well_formed && silent && y <= x {
                    continue;
                }
                if rng.gen_bool(shape.density) {
                    edges.push((x, e, y));
                }
            }
        }
        if shape.well_formed && !edges.iter().any(|&(f, e, _)| f == x && obs.contains(&e)) {
            let e = *obs.choose(rng).unwrap();
            edges.push((x, e, rng.gen_range(0..n)));
        }
    }
    let mut initial = vec![0usize];
    if n > 1 && rng.gen_bool(0.25) {
        initial.push(rng.gen_range(1..n));
    }
    let mut b = PlantNfa::builder()
        .states(states.clone())
        .observable(obs.iter().copied())
        .unobservable(unobs.iter().copied())
        .initial(initial.iter().map(|&i| states[i].clone()));
    if shape.fault {
        b = b.faults(["f"]);
    }
    for (x, e, y) in edges {
        b = b.transition(states[x].clone(), e, states[y].clone());
    }
    b.build().expect("generated plant is valid")
}

/// Random deletions, insertions and substitutions over the observable
/// events, each present with probability `p` and cost in `1..=max_cost`.
pub fn random_model(rng: &mut impl Rng, plant: &PlantNfa, max_cost: Cost, p: f64) -> AttackModel {
    let obs: Vec<Symbol> = plant.observable_symbols().collect();
    let mut m = AttackModel::empty();
    for &s in &obs {
        if rng.gen_bool(p) {
            m.add_deletion(s, rng.gen_range(1..=max_cost)).unwrap();
        }
        if rng.gen_bool(p) {
            m.add_insertion(s, rng.gen_range(1..=max_cost)).unwrap();
        }
        for &t in &obs {
            if s != t && rng.gen_bool(p) {
                m.add_substitution(s, t, rng.gen_range(1..=max_cost))
                    .unwrap();
            }
        }
    }
    m
}

/// Random word of length `0..=max_len` over the observable events.
pub fn random_word(rng: &mut impl Rng, plant: &PlantNfa, max_len: usize) -> Vec<Symbol> {
    let obs: Vec<Symbol> = plant.observable_symbols().collect();
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| *obs.choose(rng).unwrap()).collect()
}

//! Built-in example corpus. The JSON sources live under `fixtures/` and
//! are embedded so that tests and the CLI share one copy.

use crate::attack::AttackModel;
use crate::automata::PlantNfa;
use crate::io::{parse_attacks, parse_plant};

pub const FIG1_PLANT: &str = include_str!("../fixtures/fig1.json");
pub const TABLE1_ATTACKS: &str = include_str!("../fixtures/table1.json");
pub const FIG4_PLANT: &str = include_str!("../fixtures/fig4.json");
pub const TABLE2_ATTACKS: &str = include_str!("../fixtures/table2.json");
pub const FIG6_PLANT: &str = include_str!("../fixtures/fig6.json");
pub const TABLE3_ATTACKS: &str = include_str!("../fixtures/table3.json");
pub const TOY_PLANT: &str = include_str!("../fixtures/toy.json");
pub const EMPTY_ATTACKS: &str = include_str!("../fixtures/empty_attacks.json");

/// `(name, plant json, attack json)` for every shipped fixture pairing.
pub const CORPUS: &[(&str, &str, &str)] = &[
    ("fig1", FIG1_PLANT, TABLE1_ATTACKS),
    ("fig4", FIG4_PLANT, TABLE2_ATTACKS),
    ("fig6", FIG6_PLANT, TABLE3_ATTACKS),
    ("toy", TOY_PLANT, EMPTY_ATTACKS),
];

fn plant(json: &str) -> PlantNfa {
    parse_plant(json).expect("built-in fixture parses")
}

fn attacks(json: &str, plant: &PlantNfa) -> AttackModel {
    parse_attacks(json, plant).expect("built-in cost table parses")
}

pub fn fig1_plant() -> PlantNfa {
    plant(FIG1_PLANT)
}

pub fn table1_attacks(plant: &PlantNfa) -> AttackModel {
    attacks(TABLE1_ATTACKS, plant)
}

pub fn fig4_plant() -> PlantNfa {
    plant(FIG4_PLANT)
}

pub fn table2_attacks(plant: &PlantNfa) -> AttackModel {
    attacks(TABLE2_ATTACKS, plant)
}

pub fn fig6_plant() -> PlantNfa {
    plant(FIG6_PLANT)
}

pub fn table3_attacks(plant: &PlantNfa) -> AttackModel {
    attacks(TABLE3_ATTACKS, plant)
}

pub fn toy_plant() -> PlantNfa {
    plant(TOY_PLANT)
}

/// Every corpus entry, parsed.
pub fn corpus() -> Vec<(&'static str, PlantNfa, AttackModel)> {
    CORPUS
        .iter()
        .map(|&(name, p, a)| {
            let g = plant(p);
            let m = attacks(a, &g);
            (name, g, m)
        })
        .collect()
}

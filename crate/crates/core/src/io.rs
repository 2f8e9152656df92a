//! JSON file formats for plants and attack cost tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attack::{AttackModel, Cost};
use crate::automata::PlantNfa;
use crate::error::Result;

/// State and event names may be written as JSON strings or integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Name {
    Text(String),
    Number(i64),
}

impl Name {
    fn into_string(self) -> String {
        match self {
            Name::Text(s) => s,
            Name::Number(n) => n.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub from: Name,
    pub event: Name,
    pub to: Name,
}

/// On-disk plant description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    /// Free-form provenance metadata; not part of the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
    pub states: Vec<Name>,
    pub observable: Vec<Name>,
    #[serde(default)]
    pub unobservable: Vec<Name>,
    #[serde(default)]
    pub faults: Vec<Name>,
    pub initial: Vec<Name>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
}

impl PlantSpec {
    pub fn into_plant(self) -> Result<PlantNfa> {
        let mut b = PlantNfa::builder()
            .states(self.states.into_iter().map(Name::into_string))
            .observable(self.observable.into_iter().map(Name::into_string))
            .unobservable(self.unobservable.into_iter().map(Name::into_string))
            .faults(self.faults.into_iter().map(Name::into_string))
            .initial(self.initial.into_iter().map(Name::into_string));
        for t in self.transitions {
            b = b.transition(
                t.from.into_string(),
                t.event.into_string(),
                t.to.into_string(),
            );
        }
        b.build()
    }

    pub fn from_plant(plant: &PlantNfa) -> Self {
        let text = |s: &str| Name::Text(s.to_string());
        PlantSpec {
            meta: None,
            states: plant.states().map(|x| text(plant.state_name(x))).collect(),
            observable: plant
                .observable_symbols()
                .map(|s| text(plant.symbol_name(s)))
                .collect(),
            unobservable: plant
                .unobservable_symbols()
                .map(|s| text(plant.symbol_name(s)))
                .collect(),
            faults: plant
                .fault_symbols()
                .map(|s| text(plant.symbol_name(s)))
                .collect(),
            initial: plant
                .initial()
                .iter()
                .map(|&x| text(plant.state_name(x)))
                .collect(),
            transitions: plant
                .transitions()
                .map(|(x, e, y)| TransitionSpec {
                    from: text(plant.state_name(x)),
                    event: text(plant.symbol_name(e)),
                    to: text(plant.state_name(y)),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionSpec {
    pub from: String,
    pub to: String,
    pub cost: Cost,
}

/// On-disk attack cost table.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    #[serde(default)]
    pub deletions: BTreeMap<String, Cost>,
    #[serde(default)]
    pub insertions: BTreeMap<String, Cost>,
    #[serde(default)]
    pub substitutions: Vec<SubstitutionSpec>,
}

impl AttackSpec {
    /// Resolves the table against `plant`; every symbol must be observable.
    pub fn to_model(&self, plant: &PlantNfa) -> Result<AttackModel> {
        let mut b = AttackModel::builder(plant);
        for (s, &c) in &self.deletions {
            b = b.delete(s, c);
        }
        for (s, &c) in &self.insertions {
            b = b.insert(s, c);
        }
        for t in &self.substitutions {
            b = b.substitute(&t.from, &t.to, t.cost);
        }
        b.build()
    }

    pub fn from_model(model: &AttackModel, plant: &PlantNfa) -> Self {
        let name = |s| plant.symbol_name(s).to_string();
        AttackSpec {
            deletions: model
                .deletions()
                .iter()
                .map(|(&s, &c)| (name(s), c))
                .collect(),
            insertions: model
                .insertions()
                .iter()
                .map(|(&s, &c)| (name(s), c))
                .collect(),
            substitutions: model
                .substitutions()
                .iter()
                .map(|(&(f, t), &c)| SubstitutionSpec {
                    from: name(f),
                    to: name(t),
                    cost: c,
                })
                .collect(),
        }
    }
}

pub fn parse_plant(json: &str) -> Result<PlantNfa> {
    let spec: PlantSpec = serde_json::from_str(json)?;
    spec.into_plant()
}

pub fn parse_attacks(json: &str, plant: &PlantNfa) -> Result<AttackModel> {
    let spec: AttackSpec = serde_json::from_str(json)?;
    spec.to_model(plant)
}

pub fn plant_to_json(plant: &PlantNfa) -> String {
    serde_json::to_string_pretty(&PlantSpec::from_plant(plant)).expect("plant serializes")
}

pub fn attacks_to_json(model: &AttackModel, plant: &PlantNfa) -> String {
    serde_json::to_string_pretty(&AttackSpec::from_model(model, plant)).expect("table serializes")
}

//! Observation automata whose languages are the matching sequences of a
//! received observation, and their cost-annotated deterministic versions.

use std::collections::{HashMap, VecDeque};

use crate::attack::{AttackLabel, AttackModel, Cost};
use crate::automata::{PlantNfa, Symbol};
use crate::error::{Error, Result};

/// Stage automaton: stage `i` means the first `i` received symbols have
/// been explained. Deletion labels loop on every stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationAutomaton {
    word: Vec<Symbol>,
    /// Per stage: `(label, label cost, target stage)`.
    edges: Vec<Vec<(AttackLabel, Cost, usize)>>,
}

impl ObservationAutomaton {
    pub fn build(plant: &PlantNfa, received: &[Symbol], model: &AttackModel) -> Result<Self> {
        model.validate_against(plant)?;
        for &s in received {
            if s.index() >= plant.num_symbols() {
                return Err(Error::UnknownSymbol(format!("#{}", s.0)));
            }
            if !plant.is_observable(s) {
                return Err(Error::NotObservable(plant.symbol_name(s).to_string()));
            }
        }
        let deletions: Vec<(AttackLabel, Cost)> = model.deletion_labels().collect();
        let edges = (0..=received.len())
            .map(|stage| {
                let mut out: Vec<(AttackLabel, Cost, usize)> =
                    deletions.iter().map(|&(l, c)| (l, c, stage)).collect();
                if let Some(&next) = received.get(stage) {
                    out.extend(
                        model
                            .explaining_labels(next)
                            .into_iter()
                            .map(|(l, c)| (l, c, stage + 1)),
                    );
                }
                out.sort();
                out
            })
            .collect();
        Ok(ObservationAutomaton {
            word: received.to_vec(),
            edges,
        })
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    pub fn num_stages(&self) -> usize {
        self.edges.len()
    }

    pub fn final_stage(&self) -> usize {
        self.word.len()
    }

    pub fn edges_from(&self, stage: usize) -> &[(AttackLabel, Cost, usize)] {
        &self.edges[stage]
    }

    pub fn next(&self, stage: usize, label: AttackLabel) -> Option<usize> {
        self.edges[stage]
            .iter()
            .find(|&&(l, _, _)| l == label)
            .map(|&(_, _, t)| t)
    }

    /// Whether `labels` is a matching sequence of the received word.
    pub fn accepts(&self, labels: &[AttackLabel]) -> bool {
        let mut stage = 0;
        for &l in labels {
            match self.next(stage, l) {
                Some(t) => stage = t,
                None => return false,
            }
        }
        stage == self.final_stage()
    }
}

/// A state `(stage, cost)` of the costed observation DFA.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StageCost {
    pub stage: usize,
    pub cost: Cost,
}

/// Product of the stage automaton with a cost counter that saturates at
/// `bound`: a cost equal to `bound` means "at least `bound`". Use
/// `bound = C + 1` to analyse an attacker budget of `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostedObservationDfa {
    word: Vec<Symbol>,
    bound: Cost,
    states: Vec<StageCost>,
    index: HashMap<StageCost, usize>,
    edges: Vec<Vec<(AttackLabel, usize)>>,
}

impl CostedObservationDfa {
    pub fn from_stages(gs: &ObservationAutomaton, bound: Cost) -> Self {
        let init = StageCost { stage: 0, cost: 0 };
        let mut dfa = CostedObservationDfa {
            word: gs.word().to_vec(),
            bound,
            states: vec![init],
            index: HashMap::from([(init, 0)]),
            edges: vec![Vec::new()],
        };
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let here = dfa.states[i];
            for &(label, c, stage) in gs.edges_from(here.stage) {
                let next = StageCost {
                    stage,
                    cost: here.cost.saturating_add(c).min(bound),
                };
                let j = match dfa.index.get(&next) {
                    Some(&j) => j,
                    None => {
                        let j = dfa.states.len();
                        dfa.index.insert(next, j);
                        dfa.states.push(next);
                        dfa.edges.push(Vec::new());
                        queue.push_back(j);
                        j
                    }
                };
                dfa.edges[i].push((label, j));
            }
        }
        dfa
    }

    pub fn build(
        plant: &PlantNfa,
        received: &[Symbol],
        model: &AttackModel,
        bound: Cost,
    ) -> Result<Self> {
        Ok(Self::from_stages(
            &ObservationAutomaton::build(plant, received, model)?,
            bound,
        ))
    }

    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    pub fn bound(&self) -> Cost {
        self.bound
    }

    pub fn final_stage(&self) -> usize {
        self.word.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StageCost] {
        &self.states
    }

    pub fn state(&self, i: usize) -> StageCost {
        self.states[i]
    }

    pub fn index_of(&self, sc: StageCost) -> Option<usize> {
        self.index.get(&sc).copied()
    }

    pub fn edges_from(&self, i: usize) -> &[(AttackLabel, usize)] {
        &self.edges[i]
    }

    pub fn next(&self, i: usize, label: AttackLabel) -> Option<usize> {
        self.edges[i]
            .iter()
            .find(|&&(l, _)| l == label)
            .map(|&(_, j)| j)
    }

    /// Runs the DFA from `(0,0)`.
    pub fn run(&self, labels: &[AttackLabel]) -> Option<StageCost> {
        let mut cur = self.initial();
        for &l in labels {
            cur = self.next(cur, l)?;
        }
        Some(self.states[cur])
    }
}

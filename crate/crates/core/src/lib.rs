//! State estimation and fault diagnosis for partially observed
//! nondeterministic automata whose observation channel is tampered with by
//! a cost-bounded attacker (deletions, insertions, substitutions).

pub mod attack;
pub mod automata;
pub mod cmin;
pub mod diagnoser;
pub mod dot;
pub mod error;
pub mod estimator;
pub mod fixtures;
mod graph;
pub mod io;
pub mod matching;

pub use attack::{AttackLabel, AttackModel, Cost, CostedSequence};
pub use automata::{ObserverDfa, PlantNfa, StateId, StateSet, Symbol};
pub use cmin::{compute_cmin, pareto_update, CminReport, CostPair, ParetoSet};
pub use diagnoser::{verify_diagnosability, Counterexample, Diagnosis};
pub use error::{Error, PreconditionViolation, Result, WitnessStep};
pub use estimator::{estimate_least_cost, Estimate, ProductAutomaton, ProductState};
pub use matching::{CostedObservationDfa, ObservationAutomaton, StageCost};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Errors raised while validating inputs or running an analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is not observable")]
    NotObservable(String),
    #[error("invalid plant: {0}")]
    InvalidPlant(String),
    #[error("invalid attack model: {0}")]
    InvalidAttackModel(String),
    #[error("label `{0}` is not permitted by the attack model")]
    LabelNotPermitted(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("diagnosability precondition violated: {0}")]
    Precondition(#[from] PreconditionViolation),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One step of a witness path, rendered with human-readable names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessStep {
    pub from: String,
    pub event: String,
    pub to: String,
}

impl fmt::Display for WitnessStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.from, self.event, self.to)
    }
}

/// A structural assumption required for diagnosability analysis does not hold.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreconditionViolation {
    #[error("cycle of unobservable events: {}", render_cycle(.cycle))]
    UnobservableCycle { cycle: Vec<WitnessStep> },
    #[error("reachable state `{state}` has no outgoing transition (language is not live)")]
    NotLive { state: String },
}

fn render_cycle(cycle: &[WitnessStep]) -> String {
    cycle
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

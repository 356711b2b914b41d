//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::validate::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },

    #[error("invalid diagram: {0}")]
    InvalidDiagram(ValidationReport),

    #[error("model file: {0}")]
    Format(String),

    #[error("model file syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("`{0}` is not a decision node")]
    NotADecision(String),

    #[error("`{0}` is not a chance, deterministic or utility node")]
    NotUncertain(String),

    #[error("sets {0} overlap")]
    OverlappingSets(String),

    #[error("target `{0}` may not be a member of the candidate set")]
    TargetInCandidateSet(String),

    #[error("candidate pool of {pool} nodes exceeds the budget of {cap}")]
    NodeBudgetExceeded { pool: usize, cap: usize },

    #[error("{what}: {size} exceeds the cap of {cap}")]
    StateSpaceExceeded { what: &'static str, size: u128, cap: u128 },

    #[error("diagram is not annotated causal; pass assume_causal to proceed")]
    NotCausal,

    #[error(
        "arc `{from}` -> `{to}` enters the fixed set from outside it; reassess the diagram \
         with fixed variables ordered first"
    )]
    ReassessmentRequired { from: String, to: String },

    #[error("mechanisms of {0:?} are declared dependent but no joint assessment was supplied")]
    DependentMechanismsUnassessed(Vec<String>),

    #[error("`{0}` has no parent outside the fixed set; there is no mechanism to extract")]
    NothingToExtract(String),

    #[error("not in canonical form: {0}")]
    NotCanonical(String),

    #[error("decision `{0}` is not assigned")]
    MissingDecision(String),

    #[error("evidence has zero probability")]
    ZeroProbabilityEvidence,

    #[error(
        "`{0}` is not in the fixed set: a variable that the decisions can influence cannot be \
         observed before the decisions are made"
    )]
    NotObservable(String),

    #[error("diagram has no utility node")]
    NoUtilityNode,

    #[error("diagram has no decision order")]
    NoDecisionOrder,

    #[error("adding `{from}` -> `{to}` would create a cycle")]
    CycleIntroduced { from: String, to: String },
}

impl Error {
    /// True for errors raised because an enumeration cap was hit.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::NodeBudgetExceeded { .. } | Error::StateSpaceExceeded { .. }
        )
    }
}

use thiserror::Error;

use crate::algebra::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("element {0} not found")]
    NotFound(String),
    #[error("relationship {0} is opaque; its sub-mechanisms cannot be listed")]
    OpaqueExpansion(String),
    #[error("relationship {0} is already expanded")]
    AlreadyExpanded(String),
    #[error("structure is invalid: {}", render_violations(.0))]
    InvalidStructure(Vec<Violation>),
    #[error("probability {0} lies outside [0, 1]")]
    InvalidProbability(String),
    #[error("alternatives of group {group} sum to {sum}, not 1")]
    UnnormalizedAlternatives { group: String, sum: String },
    #[error("{0} is not a relationship")]
    NotARelationship(String),
    #[error("{0} is not an output entity")]
    NotAnOutcome(String),
    #[error("invalid counts: {favorable} favorable of {possible} possible")]
    InvalidCounts { favorable: u64, possible: u64 },
    #[error("denotation {outcome} => {relation} is not univocal")]
    NonUnivocal { outcome: String, relation: String },
    #[error("outcome {0} has no denotation")]
    NoDenotation(String),
    #[error("relationship {0} has no denoted outcome")]
    NoOutcome(String),
    #[error("unknown alternative group {0}")]
    UnknownGroup(String),
    #[error("probability {0} is degenerate; frequencies cannot fluctuate")]
    DegenerateProbability(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn render_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

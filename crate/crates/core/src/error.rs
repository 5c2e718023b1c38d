//! Crate-wide error type. Every validation failure named in the public
//! contracts is a distinct variant so callers can match on it.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate point id {id:?}")]
    DuplicatePointId { id: String },

    #[error("weight of point {id:?} must be strictly positive, got {weight}")]
    NonpositiveWeight { id: String, weight: String },

    #[error("blocks do not partition the point set: {detail}")]
    BlocksNotPartition { detail: String },

    #[error("cells do not partition the point set: {detail}")]
    NotAPartition { detail: String },

    #[error("refinement violation: {detail}")]
    RefinementViolation { detail: String },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("value vector has length {got}, space has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unknown point id {id:?} in {context}")]
    UnknownPointId { id: String, context: String },

    #[error("block ordinal {index} out of range: space has {count} blocks")]
    InvalidBlock { index: usize, count: usize },

    #[error("cannot enumerate events over {cells} cells (limit {limit})")]
    TooManyCells { cells: usize, limit: usize },

    #[error("operator is not compatible with the conditioning operator")]
    Incompatible,

    #[error("conditioning operator must average exactly over the space blocks")]
    ConditionerNotBlocks,

    #[error("function is not measurable for the required partition: {what}")]
    NotInRange { what: String },

    /// The operator-composition criterion and the partition-refinement
    /// criterion for compatibility disagreed. This indicates a defect in
    /// the library itself, never bad input.
    #[error(
        "compatibility criteria disagree: operator composition says {algebraic}, \
         partition refinement says {refinement}"
    )]
    CompatibilityCriteriaDisagree { algebraic: bool, refinement: bool },

    #[error("range elements belong to different operators")]
    OwnerMismatch,

    #[error("invalid rational {text:?} in {context}: {reason}")]
    InvalidRational {
        text: String,
        context: String,
        reason: String,
    },

    #[error("unknown partition {name:?}")]
    UnknownPartition { name: String },

    #[error("unknown function {name:?}")]
    UnknownFunction { name: String },

    #[error("function {name:?}: {detail}")]
    InvalidFunction { name: String, detail: String },

    #[error("instance budget infeasible: {detail}")]
    BudgetInfeasible { detail: String },

    #[error("unknown check {name:?}")]
    UnknownCheck { name: String },
}

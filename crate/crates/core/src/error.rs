use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance:\n{0}")]
    InvalidInstance(ValidationReport),
    #[error("client {client} demands provider {provider} at a quality no level provides")]
    UnsatisfiableDemand { client: String, provider: String },
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),
    #[error("execution costs are not declared level-independent")]
    LevelDependentExecCost,
    #[error("operation or execution costs vary with the quality level")]
    LevelDependentCosts,
    #[error("bulk fees missing for provider {0}")]
    MissingBulkFees(String),
    #[error("expected a single data center, found {0}")]
    NotSingleDataCenter(usize),
    #[error("reduced LP returned a fractional extreme point")]
    InternalNonBinary,
    #[error("no breakpoint: the last fractional opening must equal one")]
    NoBreakpoint,
    #[error("subset catalog would hold {count} subsets, ceiling is {ceiling}")]
    CatalogTooLarge { count: u128, ceiling: usize },
    #[error("provider {provider} needs an enumeration budget of {required} supports, budget is {budget}")]
    OversizeInstance { provider: String, required: u128, budget: u64 },
    #[error("invalid ratio targets: {0}")]
    InvalidRatioTargets(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("LP solver failed: {0}")]
    Lp(String),
    #[error("malformed document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

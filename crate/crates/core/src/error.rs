use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid demand vector: {0}")]
    InvalidDemand(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("capacity violation: {what} carries {load} > Q={capacity}")]
    CapacityViolation { what: String, load: u64, capacity: u32 },
    #[error("scenario {scenario}: demand at point {point} is not served")]
    UnservedDemand { scenario: usize, point: usize },
    #[error("scenario {scenario}: point {point} is served by {what} but not visited by it")]
    PointNotOnTour { scenario: usize, point: usize, what: String },
    #[error("scenario {scenario}: point {point} is served more than once or with the wrong demand")]
    InvalidService { scenario: usize, point: usize },
    #[error("point {point} has demand {demand} exceeding capacity {capacity}")]
    DemandExceedsCapacity { point: usize, demand: u32, capacity: u32 },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("edge set does not form a subtree containing the root")]
    DisconnectedSubtree,
    #[error("rounding probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("estimator division by zero at edge {0}")]
    DivisionByZero(usize),
    #[error("no point carries positive profit")]
    NoProfit,
    #[error("restricted assignment rounding failed: {0}")]
    AssignmentInfeasible(String),
    #[error("demand sampler failed: {0}")]
    SamplerFailure(String),
    #[error("instance too large for exact search: {0}")]
    TooLarge(String),
    #[error("hypergraph is not uniform: {0}")]
    NotUniform(String),
    #[error("schema violation at {location}: {message}")]
    SchemaViolation { location: String, message: String },
    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

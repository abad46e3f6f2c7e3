use thiserror::Error;

/// Errors reported by every analysis in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("index {index} lies beyond a table of length {len} with no tail")]
    IndexBeyondTable { index: usize, len: usize },
    #[error("series budget {0} is below the minimum of 64 terms")]
    BudgetTooSmall(usize),
    #[error("condition (A) fails at vertex {vertex}: {detail}")]
    ConditionAFailure { vertex: String, detail: String },
    #[error("{0}")]
    Unsupported(String),

    #[error("chain is not transient")]
    NotTransient,
    #[error("chain is not recurrent")]
    NotRecurrent,
    #[error("end {0} is not transient")]
    EndNotTransient(String),
    #[error("essential self-adjointness of the hub part is not established")]
    HubAssumptionMissing,
    #[error("boundary degree is unbounded (witness index {0})")]
    BoundaryDegreeUnbounded(usize),

    #[error("linear system is singular (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("Green's function approximants are not monotone at vertex {vertex} (level {level})")]
    MonotonicityViolation { level: usize, vertex: String },
    #[error("no ray fails essential self-adjointness")]
    NoNonEsaRay,
    #[error("Green's function is not square summable away from the chosen ray")]
    GreenNotL2,
    #[error("window does not connect the two poles")]
    WindowDisconnected,
    #[error("tail of the measure is infinite")]
    MeasureTailInfinite,
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("assertion failed: {0}")]
    AssertionFailure(String),

    #[error("values overflow after index {last_finite}")]
    Overflow { last_finite: usize },
    #[error("chain is not essentially self-adjoint")]
    ChainNotEsa,
    #[error("potential has no lower bound")]
    LowerBoundMissing,
    #[error("measure of the vertex set is infinite")]
    ZeroInfMeasure,
    #[error("eigenfunction is not positive at index {0}")]
    NonpositiveV(usize),

    #[error("ray condition violated: {0}")]
    RayConditionViolated(String),
    #[error("base chain is essentially self-adjoint")]
    BaseChainIsEsa,
    #[error("missing value: {0}")]
    MissingValue(String),
    #[error("weighted degree diverges at {0}")]
    DivergentDegree(String),
    #[error("series diverges where a finite sum was required: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

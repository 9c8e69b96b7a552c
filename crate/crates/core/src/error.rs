use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid cone structure: {0}")]
    InvalidStructure(&'static str),

    #[error("cone structure mismatch: {left} vs {right} coordinates")]
    StructureMismatch { left: usize, right: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("vector is not in the cone interior (lambda_min = {lambda_min:e})")]
    NotInterior { lambda_min: f64 },

    #[error("power {exponent} is undefined for eigenvalue {eigenvalue:e}")]
    PowerUndefined { exponent: f64, eigenvalue: f64 },

    #[error("arrow matrix is singular")]
    SingularArrow,

    #[error("constraint matrix has rank {rank} but {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("numerically singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("zero matrix has no block-encoding normalization")]
    ZeroMatrix,

    #[error("no strictly feasible starting point available")]
    NoStartingPoint,

    #[error("step damping could not keep the iterate inside the cone after {halvings} halvings")]
    DampingExhausted { halvings: u32 },

    #[error("duality gap stalled at {mu:e} for {window} iterations (iteration {iteration})")]
    Stalled {
        iteration: usize,
        window: usize,
        mu: f64,
    },

    #[error("invariant violated at iteration {iteration}: {what}")]
    InvariantViolated { iteration: usize, what: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

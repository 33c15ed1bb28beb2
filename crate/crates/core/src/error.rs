//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: length mismatch, expected {expected} rows, got {actual}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("bounds for `{name}` are out of order: lower {lower} > upper {upper}")]
    BoundsOrder { name: String, lower: f64, upper: f64 },

    #[error("MPS name collision: `{a}` and `{b}` both mangle to `{mangled}`")]
    MpsNameCollision { a: String, b: String, mangled: String },

    #[error("MPS parse error at line {line}: {msg}")]
    MpsParse { line: usize, msg: String },

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded")]
    Unbounded,

    #[error("solver hit an iteration or time limit")]
    SolverLimit,

    #[error("solver backend `{backend}` failed: {msg}")]
    Backend { backend: String, msg: String },

    #[error("problem has {vars} variables, exceeding the oracle cap of {cap}")]
    DimensionCap { vars: usize, cap: usize },

    #[error("simplex cycling guard exhausted after {0} iterations")]
    CyclingGuard(usize),

    #[error("self-generation rate undefined: prosumer load (denominator) is zero")]
    UndefinedRate,

    #[error("degenerate wholesale mean: dynamic adder variants divide by the mean price")]
    DegenerateMean,

    #[error("relative bill gap undefined: prosumer bill is not positive ({0})")]
    UndefinedGap(f64),

    #[error("no prosumer block in this solution (reference runs have no bill)")]
    MissingProsumer,

    #[error("omega sweep failed: every grid point was infeasible")]
    SweepFailed,

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Table {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

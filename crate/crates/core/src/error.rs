use alloc::string::String;

/// A numeric operation left its domain (division by zero, log of a
/// non-positive number, ...). Raised by the jet arithmetic and wrapped with
/// the offending sub-expression by the evaluator.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{op} (argument {arg})")]
pub struct DomainError {
    pub op: &'static str,
    pub arg: f64,
}

impl DomainError {
    pub fn new(op: &'static str, arg: f64) -> Self {
        DomainError { op, arg }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {source} in `{expr}`")]
    Domain { source: DomainError, expr: String },

    #[error("syntax error at line {line}, column {column} (byte {offset}): {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        offset: usize,
        line: usize,
        column: usize,
    },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("point lies on the wrong bundle side for {0}")]
    Side(&'static str),

    #[error("base point mismatch for {0}")]
    BasePoint(&'static str),

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("singular fiber Hessian of the Lagrangian at t = {time}")]
    SingularHessian { time: f64 },

    #[error("inadmissible jet: |dx - rho(x) y| = {residual:e}")]
    Inadmissible { residual: f64 },

    #[error("invalid argument: {0}")]
    Argument(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Newton iteration did not converge after {iters} iterations (residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("Newton iterates collapsed onto the zero solution (max |Q| = {amplitude:e})")]
    TrivialCollapse { amplitude: f64 },

    #[error("banded linear system is singular at pivot row {row}")]
    SingularSystem { row: usize },

    #[error("eigen-solver failure: {0}")]
    EigFailure(String),

    #[error("bracket [{lo}, {hi}] does not enclose a sign change (nu = {nu_lo:e}, {nu_hi:e})")]
    BadBracket {
        lo: f64,
        hi: f64,
        nu_lo: f64,
        nu_hi: f64,
    },

    #[error("identity item requires d = 2, p = 2 and c = 1 (got d = {d}, p = {p}, c = {c})")]
    WrongRegime { d: usize, p: f64, c: f64 },

    #[error("profile parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}

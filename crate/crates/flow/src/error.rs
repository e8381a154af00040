use thiserror::Error;
use zklab_core::CoreError;

pub type Result<T> = std::result::Result<T, FlowError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("box too small: soliton tail at the box edge is {ratio:e} of its peak (limit 1e-8)")]
    BoxTooSmall { ratio: f64 },

    #[error("time step {dt:e} exceeds the preflight bound {bound:e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("blow-up at t = {t}: sup|u| = {sup:e} against initial {initial:e}")]
    BlowupDetected { t: f64, sup: f64, initial: f64 },

    #[error("modulation fit diverged after {iters} iterations (residual {residual:e})")]
    FitDiverged { iters: usize, residual: f64 },

    #[error("oblique angle {theta} is outside (-pi/3, pi/3)")]
    AngleOutOfRange { theta: f64 },

    #[error("eigen-solver failure: {0}")]
    EigFailure(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FlowError {
    fn from(e: std::io::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}

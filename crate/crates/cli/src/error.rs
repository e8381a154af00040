use thiserror::Error;
use zklab_core::CoreError;
use zklab_flow::FlowError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Flow(#[from] FlowError),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// Stable machine-readable class, printed as `error[<class>]` on stderr.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::UnknownPreset(_) => "UnknownPreset",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => match e {
                CoreError::InvalidConfig(_) | CoreError::InvalidInput(_) => "ConfigError",
                CoreError::NonConvergence { .. } => "NonConvergence",
                CoreError::TrivialCollapse { .. } => "TrivialCollapse",
                CoreError::SingularSystem { .. } => "SingularSystem",
                CoreError::EigFailure(_) => "EigFailure",
                CoreError::BadBracket { .. } => "BadBracket",
                CoreError::WrongRegime { .. } => "WrongRegime",
                CoreError::Parse { .. } => "ParseError",
                CoreError::Io(_) => "IoError",
            },
            CliError::Flow(e) => match e {
                FlowError::Core(_) => "CoreError",
                FlowError::InvalidParams(_) => "ConfigError",
                FlowError::BoxTooSmall { .. } => "BoxTooSmall",
                FlowError::StepTooLarge { .. } => "StepTooLarge",
                FlowError::BlowupDetected { .. } => "BlowupDetected",
                FlowError::FitDiverged { .. } => "FitDiverged",
                FlowError::AngleOutOfRange { .. } => "AngleOutOfRange",
                FlowError::EigFailure(_) => "EigFailure",
                FlowError::Io(_) => "IoError",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "ConfigError" => 2,
            "UnknownPreset" => 3,
            "IoError" => 4,
            "NonConvergence" | "TrivialCollapse" | "SingularSystem" | "EigFailure" | "BadBracket" => 10,
            "WrongRegime" | "ParseError" | "CoreError" => 11,
            "BoxTooSmall" | "StepTooLarge" | "AngleOutOfRange" => 20,
            "BlowupDetected" | "FitDiverged" => 21,
            _ => 1,
        }
    }
}

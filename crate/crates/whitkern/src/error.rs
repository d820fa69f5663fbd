use whitkern_core::finite::FiniteError;
use whitkern_core::lab::LabError;
use whitkern_core::Error as CoreError;

/// Exit status for usage and parse errors (sysexits EX_USAGE).
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Param(_) | CoreError::Unsupported(_) => CliError::Validation(msg),
            CoreError::Lab(LabError::Unbounded | LabError::Grid(_)) => CliError::Validation(msg),
            CoreError::Finite(
                FiniteError::OrderTooLarge(_)
                | FiniteError::Shape
                | FiniteError::NegativeMinor { .. }
                | FiniteError::ComplexMinor { .. }
                | FiniteError::DuplicatePoint(_)
                | FiniteError::OutOfRange(_),
            ) => CliError::Validation(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

impl From<FiniteError> for CliError {
    fn from(e: FiniteError) -> Self {
        CoreError::from(e).into()
    }
}

impl From<whitkern_core::ParamError> for CliError {
    fn from(e: whitkern_core::ParamError) -> Self {
        CoreError::from(e).into()
    }
}

impl From<whitkern_core::SpecFunError> for CliError {
    fn from(e: whitkern_core::SpecFunError) -> Self {
        CoreError::from(e).into()
    }
}

pub type CliResult<T> = Result<T, CliError>;

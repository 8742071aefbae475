use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("hilbert space needs at least one factor")]
    EmptySpace,
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),
    #[error("boson factor `{label}` has cutoff {cutoff}, need at least 2")]
    CutoffTooSmall { label: String, cutoff: usize },
    #[error("no factor labelled `{0}`")]
    UnknownLabel(String),
    #[error("factor `{label}` must be a {expected}")]
    WrongFactorKind { label: String, expected: &'static str },
    #[error("operands live on different hilbert spaces")]
    SpaceMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("operator is not hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("steady-state solve failed: {0}")]
    SingularSystem(String),
    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("state violates density-matrix tolerances: {0}")]
    InvalidState(String),
    #[error("time integration failed: {0}")]
    Integration(String),
    #[error("mode is not populated (occupation {0:e})")]
    UnpopulatedMode(f64),
    #[error("degenerate linear system in {0}")]
    Degenerate(&'static str),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_)
                | Error::ResidualTooLarge { .. }
                | Error::InvalidState(_)
                | Error::Integration(_)
                | Error::UnpopulatedMode(_)
                | Error::Degenerate(_)
        )
    }

    /// Short machine-readable tag, stable across message wording changes.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySpace
            | Error::DuplicateLabel(_)
            | Error::CutoffTooSmall { .. }
            | Error::UnknownLabel(_)
            | Error::WrongFactorKind { .. } => "bad_space",
            Error::SpaceMismatch | Error::DimensionMismatch { .. } => "mismatch",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::SingularSystem(_) => "singular",
            Error::ResidualTooLarge { .. } => "residual",
            Error::InvalidState(_) => "invalid_state",
            Error::Integration(_) => "integration",
            Error::UnpopulatedMode(_) => "unpopulated",
            Error::Degenerate(_) => "degenerate",
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

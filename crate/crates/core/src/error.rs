use thiserror::Error;

/// Errors raised by the simulator and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("imaginary residue {residue:.3e} in expectation value")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("partial trace must keep at least one qubit")]
    EmptyKeep,

    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: String,
        value: f64,
        range: &'static str,
    },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("measurement outcome has probability {probability:.3e}; state is orthogonal to it")]
    ImpossibleOutcome { probability: f64 },

    #[error("malformed swap chain: {0}")]
    MalformedChain(String),

    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("setting {setting} has no recorded events")]
    ZeroTotal { setting: String },

    #[error("missing measurement settings: {}", .0.join(", "))]
    MissingSettings(Vec<String>),

    #[error("duplicate measurement setting {0}")]
    DuplicateSetting(String),

    #[error("outcome probabilities sum to {sum}, expected 1")]
    ProbabilityNormalization { sum: f64 },

    #[error("optimizer did not converge after {iterations} iterations (gradient max-norm {gradient_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("no root in [0, 1] for target {target}")]
    NoRoot { target: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn out_of_range(name: impl Into<String>, value: f64, range: &'static str) -> Self {
        Error::OutOfRange {
            name: name.into(),
            value,
            range,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositive { .. }
                | Error::ImaginaryResidue { .. }
                | Error::ImpossibleOutcome { .. }
                | Error::ProbabilityNormalization { .. }
                | Error::NonConvergence { .. }
                | Error::NoRoot { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

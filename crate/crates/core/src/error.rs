use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown qubit label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(String),

    #[error("qubit register mismatch: expected {expected:?}, found {found:?}")]
    RegisterMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("density matrix trace is {0}, expected 1")]
    TraceNotUnit(f64),

    #[error("density matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("integration step {dt:e} s cannot resolve a spectral spread of {omega:e} rad/s")]
    StepTooCoarse { dt: f64, omega: f64 },

    #[error("missing qubit with role {0}")]
    MissingRole(String),

    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of a physical or numerical invariant during a run,
    /// as opposed to malformed input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::Invariant(_)
                | Error::NotHermitian(_)
                | Error::TraceNotUnit(_)
                | Error::NotPositive(_)
                | Error::StepTooCoarse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

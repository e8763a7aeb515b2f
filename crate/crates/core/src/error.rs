use thiserror::Error;

pub type Result<T> = std::result::Result<T, MhError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MhError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid stabilizer group: {0}")]
    InvalidGroup(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("feasibility cap exceeded: {0}")]
    Feasibility(String),

    #[error("gate class error: {0}")]
    GateClass(String),

    #[error("syntax error on line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("overlapping supports in layer {layer}: qubit {qubit}")]
    Overlap { layer: usize, qubit: usize },

    #[error("non-unitary matrix: {0}")]
    NonUnitary(String),

    #[error("decomposition infeasible at layer {layer}: {msg}")]
    DecompositionInfeasible { layer: usize, msg: String },

    #[error("impossible forced outcome on qubit {qubit}")]
    ImpossibleOutcome { qubit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("spectral ambiguity: {0}")]
    Ambiguity(String),
}

impl MhError {
    /// True for refusals caused by size caps rather than bad input.
    pub fn is_feasibility(&self) -> bool {
        matches!(self, MhError::Feasibility(_))
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        MhError::InvalidInput(msg.into())
    }

    pub fn cap(msg: impl Into<String>) -> Self {
        MhError::Feasibility(msg.into())
    }
}

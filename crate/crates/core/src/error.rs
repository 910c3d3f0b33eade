use thiserror::Error;

use crate::circuit::GateId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expansion overflow{}: {detail}", gate.map(|g| format!(" at gate {}", g.0)).unwrap_or_default())]
    ExpansionOverflow { gate: Option<GateId>, detail: String },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("oracle too large: n = {n} exceeds cap {cap}")]
    OracleTooLarge { n: usize, cap: usize },

    #[error("search too large: {size} exceeds cap {cap}")]
    SearchTooLarge { size: u128, cap: u128 },

    #[error("missing assignment for variable `{0}`")]
    MissingAssignment(String),

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// A property that is proven to hold failed; this indicates a bug.
    #[error("invariant breached: {0}")]
    InvariantBreach(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn overflow(detail: impl Into<String>) -> Self {
        Error::ExpansionOverflow { gate: None, detail: detail.into() }
    }

    pub(crate) fn at_gate(self, gate: GateId) -> Self {
        match self {
            Error::ExpansionOverflow { gate: None, detail } => {
                Error::ExpansionOverflow { gate: Some(gate), detail }
            }
            other => other,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(
            self,
            Error::ExpansionOverflow { .. } | Error::OracleTooLarge { .. } | Error::SearchTooLarge { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

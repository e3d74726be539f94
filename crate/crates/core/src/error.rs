use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants separate three failure families that callers typically
/// handle differently: malformed inputs (`InvalidParameter`, `Parse`),
/// mathematical hypotheses that an instance fails to satisfy
/// (`Hypothesis`), and resource guards (`BudgetExceeded`).
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input file or string could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A hypothesis of a lemma or construction is violated by the given
    /// instance. The message names the failing hypothesis and the
    /// offending quantity.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// An exhaustive computation would exceed its hard operation budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Wrapper for I/O failures while reading or writing reports.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Wrapper for JSON (de)serialization failures.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }
}

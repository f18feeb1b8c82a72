use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A channel parameter violates the standard-form constraints.
    #[error("invalid channel: {field} = {value} ({reason})")]
    InvalidChannel {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The formula is not defined for this channel or parameter point.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scalar argument lies outside the closed range the formula allows.
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    Range {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// A capacity result was requested for a channel that does not meet its condition.
    #[error("condition not met: {0}")]
    Condition(String),

    /// The closed-form genie parameters do not exist for this channel.
    #[error("genie parameters infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

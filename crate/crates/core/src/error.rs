use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not enough observations: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("coefficient vector of order {got} is too short, need order {needed}")]
    InsufficientOrder { needed: usize, got: usize },

    #[error("no dates common to all inputs")]
    EmptyJoin,

    #[error("design matrix is rank deficient; dependent columns: {columns:?}")]
    RankDeficient { columns: Vec<String> },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

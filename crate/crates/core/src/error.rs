use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("instance too large: {0}")]
    SizeLimit(String),

    #[error("time {s} outside [0, {t}]")]
    Range { s: f64, t: f64 },

    #[error("unbalanced degree sequence: left sum {left}, right sum {right}")]
    Balance { left: u64, right: u64 },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("guard tripped: {0}")]
    Guard(String),

    #[error("oracle tail mass {tail:e} at k_max = {k_max} exceeds tolerance; retry with k_max >= {suggested}")]
    Truncation { k_max: usize, tail: f64, suggested: usize },

    #[error("insufficient sample: {got} < {needed}")]
    InsufficientSample { got: usize, needed: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Numeric and guard failures versus input problems; used for CLI exit codes.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::Guard(_)
                | Error::Truncation { .. }
                | Error::InsufficientSample { .. }
                | Error::SizeLimit(_)
        )
    }
}

use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("position x = {x} lies outside the domain [0, {length}] at t = {t}")]
    OutsideDomain { x: f64, t: f64, length: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("problem rejected by assumption checks: {0}")]
    Validation(String),

    #[error("solution blew up (non-finite value) at t = {t}")]
    BlowUp { t: f64 },

    #[error("snapshot storage would need {requested} snapshots, cap is {cap}")]
    Resource { requested: usize, cap: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

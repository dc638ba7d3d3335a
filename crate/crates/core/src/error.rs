use thiserror::Error;

/// Errors raised by the samplers, distributions and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a function (negative radius, p outside (0,1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A neighborhood or model configuration that cannot be applied.
    #[error("configuration error: {0}")]
    Config(String),

    /// Accept-reject sampling outside a neighborhood exceeded its attempt budget.
    #[error(
        "stuck proposal: block {block} needed more than {max_attempts} attempts \
         (neighborhood mass {mass}, state {state:?})"
    )]
    StuckProposal {
        block: usize,
        mass: f64,
        max_attempts: u64,
        state: Vec<Vec<f64>>,
    },

    /// Too few observations for an estimator.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

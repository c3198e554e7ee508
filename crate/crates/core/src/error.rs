use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("curve is not a radial graph: 1+phi = {value:.3e} at theta = {theta:.6}")]
    NotAGraph { theta: f64, value: f64 },

    #[error(
        "quadrature missed relative error {target:.1e} (estimate {estimate:.1e}) within a budget of {budget}"
    )]
    Quadrature {
        target: f64,
        estimate: f64,
        budget: usize,
    },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("budget of {0} iterations exhausted")]
    BudgetExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}

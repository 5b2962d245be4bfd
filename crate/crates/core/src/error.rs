use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no access node available to serve the user")]
    NoServer,

    #[error("simulation failed: {0}")]
    SimulationFailure(String),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(
        "bracket does not straddle the target: median({lo}) = {rate_lo}, median({hi}) = {rate_hi}, target = {target}"
    )]
    BracketNotStraddling {
        lo: f64,
        hi: f64,
        rate_lo: f64,
        rate_hi: f64,
        target: f64,
    },

    #[error("non-monotone objective: {0}")]
    NonMonotone(String),

    #[error("target rate {target} bps/Hz is not achievable by {policy} on the given tau grid")]
    UnachievableTarget { policy: String, target: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must lie in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("channel loss must be non-negative, got {0} dB")]
    NegativeLoss(f64),

    #[error("a path packet needs a remote partner, but origin and partner are both node {0}")]
    LocalPathPacket(u32),

    #[error("pair {sender}->{receiver} requests {requested} decoy slots but the schedule only has {k}")]
    Oversubscribed {
        sender: u32,
        receiver: u32,
        requested: u64,
        k: u64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} is zero")]
    ZeroDenominator(&'static str),

    #[error("{what} is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { what: &'static str, deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("leaked fraction is already saturated at zero loss (uncapped g = {0})")]
    AlreadySaturated(f64),
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

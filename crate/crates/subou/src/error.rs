use thiserror::Error;

/// Error taxonomy shared by samplers, spectral constructors, and estimators.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain on which the requested quantity is
    /// defined (non-positive scale, time, or sample count, malformed grids,
    /// and the like).
    #[error("invalid {name}: {reason}")]
    Invalid {
        name: &'static str,
        reason: String,
    },

    /// The `alpha = 1` parameterization mixes a logarithmic drift into the
    /// characteristic function and is excluded throughout.
    #[error("alpha = 1 is not supported; use alpha in (0, 1) or (1, 2]")]
    AlphaOne,

    /// A moment of the requested order does not exist for this stability
    /// index.
    #[error("moment of order {order} is infinite at stability index {alpha}")]
    InfiniteMoment { order: f64, alpha: f64 },

    /// The operation is well-defined only on a narrower parameter range than
    /// the one supplied (e.g. smoothing-rate machinery needs alpha > 1/2).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A coordinate vector does not match the number of retained modes.
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A path was sampled on a different horizon than the one requested.
    #[error("horizon mismatch: path ends at {path_horizon}, requested {requested}")]
    HorizonMismatch {
        path_horizon: f64,
        requested: f64,
    },

    /// Every Monte Carlo sample tripped the conditional-variance floor, so no
    /// estimate can be formed.
    #[error("all {requested} samples were rejected by the variance floor")]
    AllSamplesRejected { requested: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

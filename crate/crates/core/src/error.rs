use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectral aliasing: {fraction:.3e} of the pulse energy lies in the outer 1% of the frequency window")]
    Aliasing { fraction: f64 },

    #[error("pulse edge under-resolved: {samples:.2} samples per rise time, need at least {required}")]
    UnderResolved { samples: f64, required: usize },

    #[error("energy below floor at t = {time}: Γ_coll is undefined there")]
    BelowFloor { time: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("observable shape mismatch: expected {expected} elements, configuration {index} returned {found}")]
    ShapeMismatch { expected: usize, found: usize, index: u64 },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Short machine-readable tag used in the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Aliasing { .. } => "aliasing",
            Error::UnderResolved { .. } => "under_resolved",
            Error::BelowFloor { .. } => "below_floor",
            Error::Fit(_) => "fit",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}

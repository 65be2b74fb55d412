use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("derivative order {k} is not continuous for a profile of smoothness m = {m}")]
    DerivativeOrder { k: u32, m: u32 },

    #[error("numerical blowup (non-finite or overflowing field) at t = {time}")]
    Blowup { time: f64 },

    #[error("quadrature did not converge: change {change:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { change: f64, tolerance: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("time series has a sign change; the sign-definite tail subwindow is t in [{t_lo}, {t_hi}]")]
    SignChange { t_lo: f64, t_hi: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

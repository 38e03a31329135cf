use thiserror::Error;

use crate::tails::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tail model: {0}")]
    InvalidModel(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("no root in bracket: {0}")]
    NoRoot(String),

    #[error("normal quantile argument invalid: a(v) = {0} must exceed 1")]
    InvalidQuantile(f64),

    #[error("family {0} has no closed-form partial-sum law")]
    UnsupportedFamily(&'static str),

    #[error("visit count needs an explicit n_max when the mean or variance is infinite")]
    UnboundedTruncation,

    #[error("regime {requested:?} does not match model regime {actual:?}")]
    RegimeMismatch { requested: Regime, actual: Regime },

    #[error("index count {0} is below 1")]
    IndexUnderflow(i64),

    #[error("point measure has infinite intensity: {0}")]
    InfiniteIntensity(String),

    #[error("invalid window: {0}")]
    Window(String),

    #[error("truncation budget {0} must lie in (0, 1)")]
    Budget(f64),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: i64, found: i64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("no good cover: {0}")]
    NoGoodCover(String),

    #[error("not a cocycle: {0}")]
    NotCocycle(String),

    #[error("connection is not globally defined: {0}")]
    NotGlobal(String),

    #[error("wrong stratum: {0}")]
    WrongStratum(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quantization obstruction: k = {k} does not divide p*n = {pn} (required winding {pn}/{k})")]
    QuantizationObstruction { k: i64, pn: i64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

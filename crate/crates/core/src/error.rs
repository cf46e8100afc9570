use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    InvalidGrid(usize),
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),
    #[error("expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("field mean {mean:e} is not zero (sup norm {sup:e})")]
    NonZeroMean { mean: f64, sup: f64 },
    #[error("Hölder order {0} is an integer")]
    IntegerOrder(f64),
    #[error("Hölder order must be positive, got {0}")]
    NonPositiveOrder(f64),
    #[error("field is not divergence-free (max |div| = {div:e}, sup = {sup:e})")]
    NotDivergenceFree { div: f64, sup: f64 },
    #[error("adaptive time step {dt:e} underflowed at t = {t}")]
    CflViolation { t: f64, dt: f64 },
    #[error("solution blew up at t = {t}: sup norm {norm:e} exceeds guard {guard:e}")]
    Divergence { t: f64, norm: f64, guard: f64 },
    #[error("time {t} outside [0, {horizon}] or times out of order")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("degenerate control basis: {0}")]
    DegenerateBasis(String),
    #[error("degenerate slope fit: {0}")]
    DegenerateFit(String),
    #[error("function is outside the W^{{1,1}} ball: norm {norm} > radius {radius}")]
    OutOfBall { norm: f64, radius: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

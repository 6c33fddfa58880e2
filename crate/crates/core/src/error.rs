use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("grid axis {axis} has {dims} samples, stencils need at least {min}")]
    GridTooSmall {
        axis: usize,
        dims: usize,
        min: usize,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("form degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("invalid index tuple: {0}")]
    InvalidTuple(String),
    #[error("the decomposition is stated for d >= 3, got d = {0}")]
    DimensionTooSmall(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not antisymmetric (|A + A^T| = {0:e})")]
    NotAntisymmetric(f64),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    JacobiNoConvergence { sweeps: usize, off: f64 },
    #[error("unknown analytic field `{0}`")]
    UnknownAnalytic(String),
    #[error("singular map jacobian at node {node}")]
    SingularJacobian { node: usize },
    #[error("flow map folded (det J = {det:e}) at node {node}")]
    FoldedMap { node: usize, det: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-positive density {value:e} at node {node} (t = {time})")]
    NonPositiveDensity { node: usize, value: f64, time: f64 },
    #[error("non-finite state after step {step}")]
    NanDetected { step: usize },
    #[error("|d3 u3| = {value:.3} exceeds the blow-up threshold {limit} at step {step}")]
    GradientBlowup { step: usize, value: f64, limit: f64 },
    #[error("velocity history: {0}")]
    History(String),
    #[error("resolutions must be increasing and each must divide the next: {0:?}")]
    NonNested(Vec<usize>),
    #[error("slice index {index} out of range for {len} slices")]
    SliceOutOfRange { index: usize, len: usize },
    #[error("malformed RSFF data: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

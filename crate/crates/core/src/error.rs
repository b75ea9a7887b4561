use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("value array has length {found}, grid expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("index ({i}, {j}) is outside the grid and its boundary extension")]
    OutOfRange { i: isize, j: isize },

    #[error("stencil reach {reach} does not fit a grid with {n} points per axis")]
    StencilTooWide { reach: usize, n: usize },

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("median of an empty list")]
    EmptyMedian,

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("grids do not cover the same domain")]
    DomainMismatch,

    #[error("affine map is singular (det = {0})")]
    SingularMap(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

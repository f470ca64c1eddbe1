use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("face id {0} out of range")]
    InvalidFace(usize),

    #[error("invalid space configuration (r={r}, k={k}, m={m}): {reason}")]
    InvalidConfig {
        r: usize,
        k: usize,
        m: usize,
        reason: &'static str,
    },

    #[error("quadrature of degree {0} is not supported")]
    UnsupportedQuadrature(usize),

    #[error("degenerate cell {cell} (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },

    #[error("DoF matrix on cell {cell} is ill-conditioned (condition number {cond:e})")]
    IllConditioned { cell: usize, cond: f64 },

    #[error("DoF count mismatch on cell {cell}: {dofs} functionals for a space of dimension {dim}")]
    DofCountMismatch { cell: usize, dofs: usize, dim: usize },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("matrix is singular")]
    Singular,

    #[error("linear solve residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("normal trace of {field} jumps by {jump:e} (relative) across face {face}")]
    NormalJump {
        field: &'static str,
        face: usize,
        jump: f64,
    },

    #[error("solver failed at eps={eps:e}, n={n}: {source}")]
    Study {
        eps: f64,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

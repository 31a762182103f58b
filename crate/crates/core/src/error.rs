use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error(
        "Jacobi iteration did not converge (off-diagonal norm {off_norm:e} after {sweeps} sweeps)"
    )]
    NoConvergence { off_norm: f64, sweeps: usize },

    #[error("adaptive quadrature exceeded depth {depth} near x = {at}")]
    MaxDepth { depth: usize, at: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unsupported matrix dimension {0}")]
    BadDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid X-state: {0}")]
    InvalidState(String),

    #[error("no E0 state has linear entropy {s} at concurrence {c}")]
    NoLevelSet { c: f64, s: f64 },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error at line {line}, field {field}: {message}")]
    Parse {
        line: usize,
        field: usize,
        message: String,
    },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use thiserror::Error;

/// Errors produced by the generators, mapping, analog engines, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix is singular or numerically rank-deficient ({0})")]
    Singular(String),

    #[error("dynamic range violation: |entry| = {value} exceeds 1 at ({row}, {col})")]
    Range { row: usize, col: usize, value: f64 },

    #[error("array of size {rows}x{cols} exceeds the physical limit of {array_max}")]
    ArrayTooLarge {
        rows: usize,
        cols: usize,
        array_max: usize,
    },

    /// The resistive network has no unique equilibrium.
    #[error("circuit equilibrium does not exist: {0}")]
    Equilibrium(String),

    /// The network solve did not reach the requested residual.
    #[error("network solve did not converge: relative KCL residual {residual:.3e} > tolerance {tol:.1e}")]
    NonConvergence { residual: f64, tol: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by the numbers rather than the setup.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::Equilibrium(_)
                | Error::NonConvergence { .. }
                | Error::Range { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

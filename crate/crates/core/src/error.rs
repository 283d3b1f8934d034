use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    Subsystem { index: usize, count: usize },

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("Schatten index must satisfy p >= 1, got {0}")]
    SchattenIndex(f64),

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("invalid POVM: {0}")]
    Povm(String),

    #[error("invalid basis: {0}")]
    Basis(String),

    #[error("invalid probability distribution: {0}")]
    Prob(String),

    #[error("vector is not in the range of the isometry (residual {0:.3e})")]
    NotInRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parameter out of range: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency-dependent substrate response is not supported; use a constant permittivity")]
    DispersiveSubstrate,

    #[error("mode collapse: eigenvalue {0} is not positive")]
    ModeCollapse(f64),

    #[error("eigenvalue {0} lies outside (0, 1)")]
    EigenvalueOutOfRange(f64),

    #[error("overdamped mode: eigenvalue {n} is below the damping threshold {threshold}")]
    Overdamped { n: f64, threshold: f64 },

    #[error("polarizability of order {l} evaluated on its pole (u = {u})")]
    OnResonance { l: u32, u: f64 },

    #[error("spectral variable {u} is within {distance:e} of eigenvalue {n}")]
    PoleProximity { u: f64, n: f64, distance: f64 },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("eigenvectors were not computed for this spectrum")]
    MissingVectors,

    #[error("finite-difference force {force:e} is repulsive for an attractive substrate")]
    InconsistentForce { force: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
}

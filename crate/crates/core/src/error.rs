use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Bose-Einstein occupation diverges at zero frequency")]
    ZeroFrequency,

    #[error(
        "principal-value quadrature did not converge: estimate {estimate}, \
         error estimate {error:e} after {evaluations} evaluations"
    )]
    Quadrature { estimate: f64, error: f64, evaluations: usize },

    #[error("integration unstable at t = {time} ps (trace drift {drift:e}); use a smaller dt")]
    Instability { time: f64, drift: f64 },

    #[error("density matrix lost positivity at t = {time} ps (smallest eigenvalue {min_eig:e})")]
    Positivity { time: f64, min_eig: f64 },

    #[error("generator has no unique steady state")]
    SingularGenerator,
}

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("ad-eigenvalue parameter {nu} lies within the ambiguity band of the wall at {wall}")]
    BoundaryAmbiguous { nu: f64, wall: f64 },
    #[error("group element has no logarithm in the injectivity domain O")]
    NotInB,
    #[error("assignment has no value for generator {0}")]
    MissingGenerator(String),
    #[error("invalid surface: genus {genus}, {boundaries} boundary circles")]
    InvalidSurface { genus: usize, boundaries: usize },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("cannot parse word: {0}")]
    InvalidWord(String),
    #[error("singular values cluster at the rank threshold ({value:e} vs tol {tol:e})")]
    IllConditioned { value: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a cocycle: residual {residual:e}")]
    NotACocycle { residual: f64 },
    #[error("adaptive quadrature error estimate {estimate:e} exceeds tolerance")]
    QuadratureFailure { estimate: f64 },
    #[error("momentum value does not lie on the prescribed orbit (distance {distance:e})")]
    OrbitMismatch { distance: f64 },
    #[error("free sampler rejected {attempts} candidates")]
    RejectionExhausted { attempts: usize },
    #[error("constrained Newton iteration diverged (residual {residual:e})")]
    NewtonDiverged { residual: f64 },
    #[error("point is not on the smooth stratum (h0 = {h0}, omega rank {rank} of {h1})")]
    NotSmoothPoint { h0: usize, rank: usize, h1: usize },
    #[error("symplectic matrix is singular")]
    SingularOmega,
    #[error("word is not composable in the groupoid")]
    NotComposable,
}

pub type Result<T> = std::result::Result<T, Error>;

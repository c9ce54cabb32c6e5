use std::path::PathBuf;

/// Failures surfaced by the numerical and symbolic routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("operator does not commute with the group action (relative commutator {0:.3e})")]
    NonEquivariant(f64),
    #[error("level selection failed: {0}")]
    LevelSelection(String),
    #[error("sampling too coarse to certify the flow on [{0}, {1}] and no refiner is available")]
    InsufficientResolution(f64, f64),
    #[error("bisection depth cap {depth} exceeded near u = {u}")]
    NonConvergence { depth: usize, u: f64 },
    #[error("no singular-value gap at tolerance {tol:.1e} (ambiguous value {value:.3e})")]
    IllConditionedKernel { tol: f64, value: f64 },
    #[error("truncation order {0} too small: kernel data changed when it was doubled")]
    TruncationTooSmall(usize),
    #[error("phase jump of {0:.3} rad between grid points; winding number unresolved")]
    Resolution(f64),
    #[error("trace has imaginary part {0:.3e}; expected a real value")]
    EquivarianceViolation(f64),
    #[error("quadrature did not stabilise (last change {0:.3e})")]
    Quadrature(f64),
    #[error("rotation angle {0} is a multiple of 2π")]
    SingularAngle(f64),
    #[error("no integral supplied for {0}")]
    MissingIntegral(String),
    #[error("series with zero constant term is not invertible")]
    NonUnit,
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

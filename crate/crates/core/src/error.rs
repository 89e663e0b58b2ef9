use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnotVector(String),

    #[error("parameter {value} lies outside [0, 1]")]
    ParameterOutOfRange { value: f64 },

    #[error("index {index} out of range (valid: 0..{len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("grading parameter {0} must lie in (0, 1]")]
    InvalidGrading(f64),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid refinement: {0}")]
    InvalidRefinement(String),

    #[error("non-positive Jacobian determinant {det:e} at parametric point ({}, {})", zeta[0], zeta[1])]
    SingularJacobian { det: f64, zeta: [f64; 2] },

    #[error("boundary conditions: {0}")]
    BoundaryConditions(String),

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

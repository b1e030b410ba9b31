use alloc::string::String;
use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("points are not collinear (deviation {deviation:.3e})")]
    Collinearity { deviation: f64 },

    #[error("degenerate cross-ratio: coincident points in a denominator")]
    Division,

    #[error("matrix is singular")]
    Singular,

    #[error("the zero differential has no pole order")]
    UndefinedOrder,

    #[error("expected a pole of order {expected}, found {found}")]
    WrongOrder { expected: i32, found: i32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series solve did not converge at order {order}: residual {residual:.3e}")]
    Truncation { order: usize, residual: f64 },

    #[error("path came within the zero guard of phi at {z}")]
    SingularityHit { z: Complex64 },

    #[error("inadmissible flat end invariants: {0}")]
    Classification(String),

    #[error("frame error: {0}")]
    Frame(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("solver setup error: {0}")]
    Setup(String),

    #[error("path leaves the field domain at {z}")]
    DomainExit { z: Complex64 },

    #[error("ray limit not reached by flat time {flat_time}: last samples {last:?}")]
    LimitNotReached { flat_time: f64, last: [[f64; 3]; 2] },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("certification failure: {0}")]
    Certification(String),
}

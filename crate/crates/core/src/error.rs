use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate point index {0} in subset")]
    DuplicateIndex(usize),

    #[error("subset of {0} points is outside the supported range")]
    SubsetSize(usize),

    #[error("invalid squared distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("distance data is not embeddable: {0}")]
    NotEmbeddable(String),

    #[error("degenerate base simplex: cannot trilaterate (margin {margin:e})")]
    DegenerateBase { margin: f64 },

    #[error("inconsistent input: placed points miss the distance data by {mismatch:e}")]
    InconsistentInput { mismatch: f64 },

    #[error("invalid development: {}", format_violations(.0))]
    InvalidDevelopment(Vec<Violation>),

    #[error("invalid octahedron: {0}")]
    InvalidOctahedron(String),

    #[error("diagonal lengths must be positive and finite, got {0}")]
    InvalidDiagonal(f64),

    #[error("degenerate face {face:?} (A = {a:e})")]
    DegenerateFace { face: [usize; 3], a: f64 },

    #[error("degenerate tetrahedron {tetra:?} (cm = {cm:e})")]
    DegenerateTetrahedron { tetra: [usize; 4], cm: f64 },

    #[error("the development admits no realization in 3-space: {0}")]
    NoRealization(String),

    #[error("singular base tetrahedron: cannot recover an affine map")]
    SingularBase,

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("generator gave up after {0} rejections")]
    TooManyRejections(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

use thiserror::Error;

use crate::complex::{CellId, ValidationReport};

pub type Result<T, E = CmcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CmcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid incidence data: {0}")]
    InvalidIncidence(String),

    #[error("mesh failed validation with {} violation(s)", .0.violations.len())]
    InvalidMesh(ValidationReport),

    #[error("mesh is not compatibly oriented; offending (D-1)-cells: {0:?}")]
    IncompatibleOrientation(Vec<usize>),

    #[error("mesh is not orientable: contradictory signs forced at (D-1)-cell {0}")]
    NonOrientable(usize),

    #[error("cell {0:?} is not a simple polytope")]
    NonSimpleCell(CellId),

    #[error("cell {0:?} is not quasi-cubical: {1}")]
    NotQuasiCubical(CellId, String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("cells are not topologically orthogonal: {0}")]
    NotOrthogonal(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("cochain does not vanish on boundary {dim}-cell {cell}")]
    NonZeroTrace { dim: usize, cell: usize },

    #[error("sub-mesh error: {0}")]
    SubMesh(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown catalog problem `{0}`")]
    UnknownProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

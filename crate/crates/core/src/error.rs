use thiserror::Error;

use crate::solver::Basis;

/// Errors raised by operator construction, mesh handling and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {0} outside the supported range {min}..={max}", min = crate::MIN_DEGREE, max = crate::MAX_DEGREE)]
    DegreeOutOfRange(usize),
    #[error("invalid face or barycentric index {0} (expected 0..=3)")]
    InvalidFace(usize),
    #[error("multi-index {alpha:?} does not have total degree {degree}")]
    DegreeMismatch { alpha: Vec<usize>, degree: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} (expected 1, 2 or 3)")]
    InvalidDimension(usize),
    #[error("warp & blend nodes are tabulated only for degrees 1..=9, got {0}")]
    UnsupportedNodeDegree(usize),
    #[error("vandermonde condition number {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("all-zero operator has no condition number")]
    ZeroOperator,
    #[error("mesh must have at least one cell per axis")]
    EmptyMesh,
    #[error("element {0} is degenerate (zero volume)")]
    DegenerateElement(usize),
    #[error("non-conforming mesh: element {element} face {face} has no matching point on its neighbour")]
    NonConforming { element: usize, face: usize },
    #[error("basis mismatch: state is {state:?}, operators are {operators:?}")]
    BasisMismatch { state: Basis, operators: Basis },
    #[error("invalid material on element {0}: kappa and rho must be positive")]
    InvalidMaterial(usize),
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("cfl must lie in (0, 1], got {0}")]
    InvalidCfl(f64),
    #[error("lift mode {0} is only available for the Bernstein basis")]
    UnsupportedLiftMode(&'static str),
    #[error("run became unstable at step {step}: energy {energy:.6e} exceeds 10x the initial {initial:.6e}")]
    Unstable { step: usize, energy: f64, initial: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

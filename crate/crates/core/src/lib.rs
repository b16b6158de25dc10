//! Nodal and Bernstein-Bezier discontinuous Galerkin operators on
//! tetrahedra, and an upwind DG solver for the first-order acoustic wave
//! equation built on them.
//!
//! Element-parallel kernels use rayon when the `parallel` feature is on
//! (the default); without it every kernel runs sequentially.

pub mod bernstein;
pub mod checks;
pub mod error;
pub mod lab;
pub mod mesh;
pub mod modal;
pub mod nodal;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod tensor_index;

pub use error::{Error, Result};
pub use scalar::{Precision, Real};
pub use sparse::{MaddCount, OpCounter, SparseRowOperator};
pub use tensor_index::{MultiIndex3, MultiIndex4, ReferenceTet};

/// Smallest supported polynomial degree.
pub const MIN_DEGREE: usize = 1;
/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 20;

//! Dynamic Biot poroelasticity: continuous Galerkin–Petrov time stepping on
//! an H(div)-conforming discontinuous Galerkin space discretization.

// Dense kernels index several arrays per loop; `!(x > 0.0)` is used on
// purpose so that NaN is rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod cli;
pub mod error;
pub mod fem_spaces;
pub mod linalg;
pub mod mesh;
pub mod slab_solver;
pub mod time_basis;
pub mod verification;

pub use error::{Error, Result};

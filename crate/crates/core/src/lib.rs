//! Spherical matrix factorization.
//!
//! Minimizes `‖X - U V‖²_F` where `U` is orthonormal or nonnegative and every
//! column of `V` lies on a sphere of common radius `l`, optionally restricted
//! to nonnegative and/or `s`-sparse vectors. The solver alternates linearized
//! proximal steps on `U` and on the columns of `V` with a closed-form update
//! of `l`; see [`solver`].

pub mod analysis;
pub mod constraints;
pub mod data_io;
pub mod error;
pub mod numerics;
pub mod solver;

pub use constraints::{ConstraintSpec, USet, VSet};
pub use error::{Error, Result};
pub use numerics::DenseMatrix;
pub use solver::{solve, FactorizationState, SolverConfig, TraceRecord};

//! Interpolatory model order reduction for linear structured systems.
//!
//! Reachable and observable subspaces are sampled at frequency points,
//! jointly truncated by SVD and used for a Petrov-Galerkin projection that
//! preserves the affine structure `K(s) = Σ f_i(s) A_i`. The interpolation
//! points are either taken from a full training grid (DROP) or picked
//! greedily from it by the residual of the associated generalized Sylvester
//! equation (GDROP).

pub mod config;
pub mod dominant;
pub mod error;
pub mod function;
pub mod linalg;
pub mod matrix;
pub mod models;
pub mod mtx;
pub mod pipeline;
pub mod sylvester;
pub mod system;
pub mod training;

pub use error::{Error, Result};
pub use function::ScalarFunction;
pub use matrix::SysMatrix;
pub use system::{StructuredSystem, Term};
pub use training::{FrequencyPoint, Spacing, TrainingSet};

pub use faer::c64;

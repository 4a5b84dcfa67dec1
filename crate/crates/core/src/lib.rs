//! Exact diagonalization and analytic limits for quantum dimers with
//! rotational freedom in a two-mode chiral cavity.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bo;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod perturbation;
pub mod quad;
pub mod rpa;
pub mod sparse;
pub mod special;

pub use error::{Error, Result};
pub use model::{CouplingScaling, Inertia, ModelParams};

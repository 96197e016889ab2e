//! Variational solver for −Δ_p u − λh|u|^{p−2}u = f|u|^{γ−2}u on a truncated box.
//!
//! The pipeline computes the first eigenpair, the extreme parameter λ*,
//! the two Nehari branches below λ*, the first solution past λ* and a
//! mountain-pass second solution.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod branches;
mod common;
pub mod domain;
pub mod eigensolve;
pub mod error;
pub mod exec;
pub mod extremal;
pub mod functionals;
pub mod linalg;
pub mod mountainpass;
pub mod optim;
pub mod options;
pub mod precond;
pub mod weights;

pub use domain::{build_domain, Domain, Field, Sign, WeightField};
pub use error::{Result, SolverError};
pub use exec::Exec;
pub use functionals::{EnergyReport, NehariClass, ProblemData};
pub use options::SolverOptions;
pub use weights::Profile;

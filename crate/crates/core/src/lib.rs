//! Decision and certification of generalized convexity notions for energy
//! densities on symmetric 2×2 and 3×3 matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: small dense matrices, the isometric embedding of symmetric
//!   matrices, minors, cofactors and a Jacobi eigensolver.
//! * [`quadform`]: quadratic forms on symmetric matrices and the built-in
//!   catalog of forms and test functions.
//! * [`roc`]: symmetric rank-one convexity (minimization over the compatible
//!   cone `a⊙b`, directional scans, the constant η).
//! * [`polycert`]: symmetric polyconvexity certificates for quadratic forms,
//!   classification, and the linear-system test for the counterexample form.
//! * [`translate`]: translation-method lower bounds for 2d envelopes via
//!   discrete Legendre–Fenchel transforms.

pub mod error;
mod json;
pub mod linalg;
pub mod optim;
pub mod polycert;
pub mod quadform;
pub mod roc;
pub mod tensor;
pub mod translate;

pub use error::{Error, Result};

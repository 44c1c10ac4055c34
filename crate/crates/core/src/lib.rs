//! Numerical verification of Hornich-Hlawka type inequalities.
//!
//! The crate evaluates signed margins for a catalog of functional and matrix
//! inequalities built from difference operators: divided differences and
//! convexity probes for scalar functions, alternating subset sums for
//! functions on the nonnegative orthant, and determinant / immanant /
//! tensor-power inequalities over positive semidefinite matrices. A seeded
//! search harness runs randomized verification campaigns and hunts for
//! counterexamples; the `hlawka` binary exposes everything on the command
//! line.
//!
//! Margins follow one convention throughout: an inequality `L >= R` is
//! reported as `margin = L - R` together with a `scale` (the largest term
//! that entered the computation), and it *passes* when
//! `margin >= -tol * scale`.

pub mod cli;
pub mod comb;
pub mod cone;
pub mod error;
pub mod harness;
pub mod inequalities;
pub mod matrix;
pub mod scalar;
pub mod tol;

pub use error::Error;
pub use tol::{Margin, TolerancePolicy};

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

//! Online inverse linear optimization.
//!
//! An agent repeatedly solves `max <c*, x>` over a feasible set `X_t` and we
//! only see the pair `(X_t, x_t)`. This crate learns predictions `ĉ_t` of the
//! hidden objective with Follow-The-Regularized-Leader over suboptimality
//! (Fenchel-Young) losses, and certifies the associated regret guarantees
//! round by round against brute-force oracles.
//!
//! Module map:
//!
//! - [`vector`], [`norm`], [`feasible`]: shared numeric types and action sets.
//! - [`oracle`]: exact forward oracles `argmax_{x in X} <c, x>`.
//! - [`loss`]: suboptimality, estimate and Fenchel-Young losses.
//! - [`learner`]: FTRL with pluggable regularizers and step schedules.
//! - [`analysis`]: regret ledger, bound checks, gap certification and
//!   online-to-batch evaluation.

pub mod analysis;
pub mod error;
pub mod feasible;
pub mod learner;
pub mod loss;
pub mod norm;
pub mod oracle;
pub mod vector;

pub use error::{Error, Result};
pub use feasible::{DagPaths, EnumerationCap, FeasibleSet, Knapsack, Observation};
pub use norm::NormPair;
pub use vector::Vector;

/// Relative scale of the certification tolerance.
pub const TAU_REL: f64 = 1e-9;

/// Tolerance used for every certified inequality: `1e-9 * (1 + |a| + |b|)`.
#[inline]
pub fn tau(a: f64, b: f64) -> f64 {
    TAU_REL * (1.0 + a.abs() + b.abs())
}

/// `lhs <= rhs` up to [`tau`].
#[inline]
pub fn leq_tol(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + tau(lhs, rhs)
}

//! Lorentzian distance on model spacetimes.
//!
//! Two independent routes are provided and cross-checked:
//!
//! * the metric route: steep functions (`g(∇f,∇f) ≤ -1`, past-directed
//!   gradient) give `d(p,q) = inf [f(q) - f(p)]⁺`, while the classical
//!   definition maximizes proper time over causal curves;
//! * the operator route: causality and steepness of a test function are
//!   encoded as negative semi-definiteness of `J[D,f]`, `J([D,f] + iχ)`
//!   (even dimension) or `J([D,f] ± 1)` (odd dimension) on the spinor fiber.
//!
//! Modules:
//!
//! * [`clifford`]: gamma matrices, fundamental symmetry, chirality and the
//!   dimension-raising constructions.
//! * [`spacetime`]: Minkowski and spatially flat FLRW models with their
//!   pseudo-orthonormal frames.
//! * [`causal`]: gradient and operator checks, equivalence scans.
//! * [`distance`]: analytic, curve-maximization, steep-variational and
//!   Riemannian-baseline distances.
//! * [`cli`]: the `lorentzdist` command-line front end.

// `!(a <= b)` is used on purpose so that NaN fails the comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod cli;
pub mod clifford;
pub mod distance;
pub mod error;
pub mod linalg;
pub mod spacetime;

pub use error::{Error, Result};

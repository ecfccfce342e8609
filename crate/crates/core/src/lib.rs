//! Maximum same-color rectangle matchings of random bichromatic point sets.
//!
//! - [`geometry`]: colored point sets, rectangles, matching validation, instance files.
//! - [`solvers`]: exact branch and bound, an exhaustive oracle, and a sweep heuristic.
//! - [`process`]: finite-state first-order homogeneous processes: stationary
//!   distributions, convergence index, and expectation bounds for reward sums.
//! - [`counterexample`]: exact and sampled probabilities showing the sweep
//!   process is not Markov.
//! - [`concentration`]: bounded differences, McDiarmid tail bounds,
//!   superadditivity, and Monte Carlo estimates of the matched fraction.
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod counterexample;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod process;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};

//! Adaptive cubic regularization with limited-memory SR1 curvature and a
//! shape-changing norm that makes the regularized subproblem separable, so
//! each step has a closed form. Includes first-order and L-BFGS baselines,
//! a problem suite, a mini-batch driver with adaptive batch growth, and the
//! plumbing behind the `bench` binary.

pub mod baselines;
pub mod bench;
pub mod dense;
pub mod error;
pub mod lsr1;
pub mod problems;
pub mod solver;
pub mod stochastic;
pub mod subproblem;

pub use error::{Error, Result};

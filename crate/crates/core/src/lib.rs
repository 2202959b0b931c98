//! Solvers for balanced delegation and monotone persuasion.
//!
//! A principal either restricts an informed agent to a closed set of
//! decisions that must contain both extremes (balanced delegation) or
//! commits to a monotone partition of the state space (monotone persuasion).
//! The two problems are strategically equivalent: this crate transforms
//! primitives between them, evaluates principal and agent payoffs for any
//! monotone set, reduces linear problems to a scalar value function over
//! posterior means, verifies candidate optima with a price-function
//! certificate, solves monopoly price-cap regulation with and without a
//! participation constraint, and cross-checks everything against an
//! exhaustive brute-force oracle.

pub mod agent;
pub mod dist;
pub mod equivalence;
pub mod error;
pub mod monotone;
pub mod oracle;
pub mod poly;
pub mod primitive;
pub mod scenarios;
pub mod solver;
pub mod valuation;

pub use dist::QuantileDistribution;
pub use error::{Error, Result};
pub use monotone::{Element, MonotoneSet};
pub use poly::PiecewisePoly;
pub use primitive::{make_linear_primitive, Orientation, Primitive};

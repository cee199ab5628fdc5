//! Equilibrium engine for two-party electoral competition in which parties
//! hold fixed ideological positions and choose policy platforms.

// `!(a < b)` is how NaN lands in the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod gaussmath;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

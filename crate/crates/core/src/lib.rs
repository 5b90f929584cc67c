//! Trainability of randomly initialized ReLU networks.
//!
//! The crate computes born-dead probabilities of ReLU neurons, the distribution
//! of active neurons per layer, closed-form and sampled trainability, a
//! constructive interpolating network and a data-dependent bias initialization,
//! together with a small training harness used to check all of them.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bdp;
pub mod dataset;
pub mod datadep;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod interp;
pub mod linalg;
pub mod mathkit;
pub mod netcore;
pub mod output;
pub mod rng;
pub mod trainability;

pub use dataset::Dataset;
pub use error::{Error, Result};

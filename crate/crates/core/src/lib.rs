//! Residual bootstrap for regression residual processes.
//!
//! This crate holds the algorithmic core: error laws, kernels and bandwidth
//! rules, Nadaraya-Watson and least-squares fits, step and kernel-smoothed
//! residual distribution functions, the non-smooth and smooth residual
//! bootstrap engines, and the symmetry and goodness-of-fit tests built on
//! top of them.
//!
//! It is `no_std` and needs only `alloc`. Randomness enters through
//! [`rand::Rng`] handles owned by the caller, so replicates can run on
//! independent streams in parallel; the `residboot` crate supplies the seeded
//! stream derivation, parallel driver, and file formats.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bootstrap;
pub mod distributions;
pub mod empirical;
mod error;
pub mod inference;
pub mod kernels;
pub mod math;
pub mod regression;

pub use error::{Error, Result};

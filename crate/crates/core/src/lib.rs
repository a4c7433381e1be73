//! Classical two-state (and N-state) stochastic machines driven by a rate
//! generator, two coupled position-based qubits in a tight-binding model, and
//! the real 2N-dimensional image of an N-level quantum evolution.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the scenario
//! runner and the verification harness live in the `epitb` crate.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coupled;
pub mod density;
pub mod epidemic;
pub mod mapping;
pub mod numkit;
pub mod quantum;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;

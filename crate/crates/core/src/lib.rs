//! Sign-indefinite second-order problems on star and tadpole networks:
//! well-posedness tests, stationary solves, closed-form spectra, Riesz-basis
//! diagnostics and spectral propagators.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod error;
pub mod evolution;
pub mod func;
pub mod graph;
pub mod quad;
pub mod roots;
pub mod spectra;
pub mod stationary;
pub mod wellposed;

pub use error::{Error, Result};

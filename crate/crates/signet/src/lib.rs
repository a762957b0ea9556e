//! File formats, CSV emitters, the finite-difference oracle and the `signet`
//! command-line front end on top of `signet-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod format;
pub mod oracle;

pub use error::{Error, Result};

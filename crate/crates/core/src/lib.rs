//! Couplings, innovation encodings and Vershik-criterion dynamic programs for
//! stationary binary processes with long memory.

// `!(x < y)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extension;
pub mod harness;
pub mod innovation;
pub mod kernel;
pub mod reconstruction;
pub mod report;
pub mod rng;
pub mod stats;
pub mod vershik;
pub mod word;

pub use error::{Error, Result};
pub use kernel::Kernel;
pub use word::Word;

//! Multivariate polynomial codes for straggler-tolerant distributed matrix
//! chain multiplication over a prime field.

pub mod analysis;
pub mod chain;
pub mod decoding;
pub mod encoding;
pub mod error;
pub mod field;
pub mod index;
pub mod placement;
pub mod sim;

pub use error::{Error, Result};

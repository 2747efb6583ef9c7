//! Entanglement harvesting between static detectors outside a BTZ black hole.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod correlations;
pub mod detector;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod sweep;
pub mod wightman;

pub use error::{Error, Result};

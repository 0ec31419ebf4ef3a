//! Desk-scale laboratory for neural-network equalizers in coherent optical links.

pub mod channel;
pub mod complexity;
pub mod data;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod pitfalls;
pub mod signal;

pub use error::{Error, Result};
pub use signal::DualPol;

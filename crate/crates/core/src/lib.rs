//! Static-field tunneling ionization in one-dimensional space-fractional
//! quantum mechanics.
//!
//! The crate pairs a pseudo-spectral simulator (split-step propagation with a
//! Riesz kinetic symbol `|k|^alpha / 2`) with the analytic fractional-ADK
//! exponent it is benchmarked against.

pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod fadk;
pub mod grid;
pub mod groundstate;
pub mod model;
pub mod prop;
pub mod rates;

pub use error::{Error, Result};

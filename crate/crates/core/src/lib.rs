//! Spinorial representation of isometric immersions in Euclidean space.
//!
//! The pipeline runs immersion, adapted frame, Spin^C spinor field, Killing
//! residual, closed 1-form, integration and finally validation of the
//! reconstructed immersion against the intrinsic data it came from.

pub mod clifford;
pub mod config;
mod error;
pub mod export;
pub mod frames;
pub mod grid;
pub mod pipeline;
pub mod scenarios;
pub mod spinfield;
pub mod weierstrass;

pub use error::*;

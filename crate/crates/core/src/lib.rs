//! Weakly-compressible SPH solver with interchangeable, instrumented force
//! engines.

pub mod bench;
pub mod engines;
pub mod error;
pub mod grid;
pub mod model;
pub mod physics;
pub mod sim;

pub use error::{Error, Result};

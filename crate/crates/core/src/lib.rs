//! Simulation and sampling of noisy random quantum circuits: a stabilizer
//! track for Clifford circuits with heralded noise, a matrix-product density
//! operator track, a dense density-matrix oracle, and the lightcone patching
//! sampler built on top of them.

pub mod circuit;
pub mod experiments;
pub mod error;
pub mod info;
pub mod linalg;
pub mod mpdo;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod stabilizer;
pub mod stats;

pub use error::{Error, Result};

//! Repetition-code memory under circuit noise: effective error model,
//! minimum-weight perfect matching decoder, and the statistical-mechanics
//! mapping to a correlated random-bond Ising model on the triangular lattice.

pub mod decoder;
pub mod error;
pub mod fss;
pub mod lattice;
pub mod matching;
pub mod noise;
pub mod rng;
pub mod spin_glass;

pub use error::{Error, Result};

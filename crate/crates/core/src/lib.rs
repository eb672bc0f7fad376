pub mod cli;
pub mod decomposition;
pub mod error;
pub mod exponent;
pub mod experiments;
pub mod grid;
pub mod means;
pub mod norms;
pub mod operators;
pub mod rng;
pub mod selftest;
pub mod weights;

pub use error::{Error, Result};

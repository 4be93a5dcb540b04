pub mod cli;
pub mod error;
pub mod numerics;
pub mod ratpdf;
pub mod realization;
pub mod moments;
pub mod sbt;
pub mod sim;
pub mod svfilter;

pub use error::{Error, Result};

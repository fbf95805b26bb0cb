//! β-expansions, full cylinders, and a Cantor-set construction inside products of
//! exact approximation sets.

pub mod error;
pub mod numerics;
pub mod approximation;
pub mod cantor;
pub mod cli;
pub mod cylinders;
pub mod dimension;
pub mod words;

pub use error::{Error, Result};

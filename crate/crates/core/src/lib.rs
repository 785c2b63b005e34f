pub mod cli;
pub mod error;
pub mod eval;
pub mod group;
pub mod metric;
pub mod model;
mod nn;
pub mod objective;
pub mod toydata;
pub mod trainer;

pub use error::{Error, Result};

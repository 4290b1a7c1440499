pub mod cli;
pub mod corrnn;
pub mod data;
pub mod error;
pub mod gan;
pub mod metrics;
pub mod nn;

pub use error::{Error, Result};

//! Pipeline commands behind the `mcbrp` binary.

pub mod commands;
pub mod config;

pub use config::{ConfigOverrides, RunConfig};

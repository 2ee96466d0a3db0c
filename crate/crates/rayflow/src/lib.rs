//! IO, datasets, metrics, verification, and benchmarking around
//! `rayflow-core`. The `rayflow` binary in this crate is the CLI.

pub mod assignment;
pub mod bench;
pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod verify;

pub use error::{Error, Result};

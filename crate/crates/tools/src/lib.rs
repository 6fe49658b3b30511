//! File formats, benchmarking and the `mcc` command line for the
//! multi-center classifier.

pub mod bench;
pub mod cli;
pub mod error;
pub mod fingerprint;
pub mod formats;

pub use error::{Result, ToolError};

//! Multi-center template matching for sensitivity-prioritized time-series
//! detection.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the distance
//! kernels, the multi-center classifier (training, ranking and inference),
//! signal conditioning and windowing, augmentation, dataset generators,
//! evaluation metrics and the reference baselines. File formats, timing and
//! the command-line tool live in the `mcc-tools` crate.

#![no_std]
// `!(x > 0.0)` guards are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod augment;
pub mod baselines;
pub mod datasets;
pub mod distance;
mod error;
pub mod eval;
pub mod mcc;
pub mod pipeline;
pub mod preprocess;
mod rng;
mod window;

pub use distance::{DistanceKind, DistanceSpec};
pub use error::{Error, Result};
pub use mcc::{MccModel, Template, TrainConfig, Variant};
pub use window::Window;

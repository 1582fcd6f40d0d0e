//! File formats, statistics, experiment harness and CLI support on top of `matchlab-core`.

pub mod error;
pub mod formats;
pub mod harness;
pub mod stats;

pub use error::{Error, Result};
pub use matchlab_core as core;

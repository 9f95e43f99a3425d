//! Radon-projection texture descriptors for histopathology patches, with
//! stain separation, retrieval and linear classification.

pub mod classifier;
pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod imaging;
pub mod metrics;
pub mod pipeline;
pub mod retrieval;
pub mod stain;
pub mod synthetic;

pub use error::{Error, Result};

//! Deterministic multimodal embodied-agent simulation engine.

pub mod audio;
pub mod dataset;
pub mod env;
pub mod error;
pub mod humanoid;
pub mod math;
pub mod net;
pub mod physics;
pub mod sim;
pub mod tactile;
pub mod tasks;
pub mod vision;

pub use error::{Error, Result};

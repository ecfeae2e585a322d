//! Experiment harness: configuration, metrics export, training and
//! evaluation loops, checkpointing, and the vehicle-count sweep.

pub mod checkpoint;
pub mod config;
pub mod metrics;
pub mod run;
pub mod sweep;

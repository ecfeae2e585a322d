//! Simulation core for a UAV-assisted vehicular edge network.
//!
//! Vehicles on a street segment generate perception tasks; each task is
//! executed locally, at a loitering UAV, or at the base station, using
//! cached input data whose freshness is tracked with age-of-information
//! counters. A hand-written DDPG learner (plus four baseline policies)
//! drives the per-slot cache refresh, execution, and bandwidth decisions.
//!
//! The crate is `no_std` + `alloc`: all state is plain values, all
//! randomness flows through explicitly seeded streams, and IO lives in
//! the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod agent;
pub mod baselines;
pub mod caching;
pub mod config;
pub mod env;
pub mod error;
pub mod execution;
pub mod link;
pub mod rng;
pub mod tasks;
pub mod util;
pub mod world;

pub use config::ScenarioConfig;
pub use env::{ActionPlan, Env, StepOutcome};
pub use error::SimError;

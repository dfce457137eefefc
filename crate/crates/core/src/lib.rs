//! Resource allocation for indoor optical-wireless HetNets.
//!
//! The crate is layered bottom-up:
//!
//! - [`channel`] ray-traces DC optical gains (line of sight plus first and
//!   second order diffuse reflections) over a discretized empty room.
//! - [`link`] turns a gain matrix and a WDMA assignment into per-user
//!   photocurrents, noise, SINR and spectral efficiency.
//! - [`env`] wraps the link model as a Markov decision process whose state is
//!   a QoS bit vector and whose actions index every injective user-to-slot map.
//! - [`agents`] holds the tabular epsilon-greedy Q-learning agent, an exact
//!   exhaustive optimizer and a uniform random baseline.
//! - [`scenario`], [`report`] and [`experiment`] load experiment descriptions,
//!   write CSV reports and run the end-to-end comparison.

pub mod agents;
pub mod channel;
pub mod env;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod link;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};

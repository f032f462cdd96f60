//! Monte-Carlo simulation of a centrally coordinated cognitive radar network.
//!
//! Radar nodes pick frequency channels each coherent pulse interval (CPI)
//! while cooperatively tracking a single target. The coordinator fuses the
//! per-node position estimates, runs a constant-velocity Kalman filter, and
//! drives the channel-selection policies:
//!
//! - `oracle`: knows the true channel metrics and ranges, zero regret.
//! - `random`: a uniformly random matching every CPI.
//! - `etc`: explore-then-commit with UCB channel elimination.
//! - `etp`: explore-then-predict, which after convergence re-optimizes the
//!   matching every CPI using ranges predicted from the track.
//!
//! Module map: [`scene`] (geometry), [`rf`] (channels, radar equation,
//! measurement noise), [`tracking`] (fusion and Kalman filter),
//! [`matching`] (assignment, utility, regret), [`bandits`] (policies and
//! coordinator feedback), [`sim`] (configuration, run loop, metrics, I/O).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandits;
pub mod error;
pub mod matching;
pub mod rf;
pub mod rng;
pub mod scene;
pub mod sim;
pub mod tracking;

pub use error::{Error, Result};

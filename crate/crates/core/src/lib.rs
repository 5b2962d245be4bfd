//! Simulation and planning toolkit for ultra-dense wireless networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`pointprocess`] samples access-node (AN) and user (UE) layouts and
//!   associates every UE with its nearest AN.
//! * [`channel`] turns distances into link gains, SINR values and rates.
//! * [`montecarlo`] estimates the typical-UE SIR and rate distributions by
//!   repeated snapshot simulation.
//! * [`analytic`] is the fast semi-analytic counterpart, certified against
//!   the Monte Carlo engine.
//! * [`planner`] inverts the rate distribution (minimum densification ratio,
//!   densification/exploitation tradeoffs).
//! * [`coordination`] evaluates finite-area networks under an uncoordinated
//!   baseline and two coordinated resource-allocation policies.
//! * [`expcli`] ties everything together behind a config-driven runner.

pub mod analytic;
pub mod channel;
pub mod coordination;
pub mod error;
pub mod expcli;
pub mod montecarlo;
pub mod planner;
pub mod pointprocess;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

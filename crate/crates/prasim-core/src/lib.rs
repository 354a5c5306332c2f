//! Two-timescale predictive resource allocation for an OFDMA downlink
//! serving video-on-demand and real-time users.
//!
//! The crate is organized along the pipeline:
//!
//! - [`numerics`]: special functions, root finding, gradient checks, and the
//!   log-barrier solver used by every planner.
//! - [`channel`]: road/BS geometry, Markov mobility, large-scale gain traces
//!   (true and predicted), and counter-based Rayleigh fading streams.
//! - [`traffic`]: synthetic layered video traces, compound-Poisson real-time
//!   arrivals, effective bandwidth, and QoS-exponent solving.
//! - [`linkmodel`]: the two water-filling laws, their water-level equations,
//!   and the closed-form average-rate / effective-capacity maps.
//! - [`planner`]: window-optimal, per-frame, heuristic, and baseline
//!   planning policies plus feasibility handling via quality degradation.
//! - [`simulator`]: the slot-level Monte Carlo engine, queueing, energy
//!   accounting, and QoS audits.
//! - [`config`] / [`experiment`]: scenario configuration, sweeps, paired-seed
//!   orchestration, and result tables.

pub mod channel;
pub mod config;
pub mod experiment;
pub mod linkmodel;
pub mod numerics;
pub mod planner;
pub mod simulator;
pub mod traffic;

pub use config::{Policy, ScenarioConfig, SweepSpec};
pub use experiment::{run_experiment, summarize, RunRecord};
pub use numerics::NumericsError;

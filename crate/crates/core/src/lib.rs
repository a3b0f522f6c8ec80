//! Simulation and analysis of parallel processing systems whose jobs are split
//! into `k` tasks served by `l` workers.
//!
//! Three parallel models are covered: split-merge, single-queue fork-join and
//! conventional fork-join. The [`simulator`] runs them as discrete-event
//! simulations with a two-class scheduling-overhead model, the [`calculus`]
//! module derives stochastic network-calculus envelopes, stability regions and
//! sojourn/waiting-time quantile bounds, and [`experiments`] ties both together
//! for parameter sweeps, trace ingestion and overhead fitting.
//!
//! All times are milliseconds and all rates are per millisecond inside the
//! library. The calculus functions are unit agnostic.

#![forbid(unsafe_code)]
#![warn(rust_2018_idioms, missing_debug_implementations)]

pub mod calculus;
pub mod error;
pub mod experiments;
pub mod simulator;
pub mod stochastic;

pub use error::{Error, Result};

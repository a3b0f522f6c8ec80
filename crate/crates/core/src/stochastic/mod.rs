//! Random variates, reproducible random streams and empirical statistics
//! shared by the simulator and the calculus engine.

mod distribution;
mod empirical;
mod rng;

pub use distribution::Distribution;
pub use empirical::{pp_plot, BoxplotSummary, EmpiricalSample, DEFAULT_PP_GRID};
pub use rng::{RngStream, StreamPurpose};

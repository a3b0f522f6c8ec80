//! Max-plus stochastic network calculus for parallel systems with tiny tasks.
//!
//! Arrival and service processes are described by `(σ, ρ)`-envelopes with
//! `σ = 0` (iid increments). A service envelope `ρ_S(θ)` bounds the MGF of the
//! job service increments, an arrival envelope `ρ_A(-θ)` the MGF of the
//! negated inter-arrival times. Quantile bounds follow by optimizing the free
//! parameter `θ` subject to `ρ_S(θ) <= ρ_A(-θ)`.

mod bounds;
mod envelope;
mod erlang;
mod export;
mod optimize;
mod params;
mod quadrature;

pub use bounds::{
    approx_sojourn_fj_overhead, approx_sojourn_sm_overhead, bound_forkjoin_conventional,
    bound_forkjoin_tiny, bound_ideal_partition, bound_single_server, bound_splitmerge_big,
    bound_splitmerge_tiny, BoundResult, Metric,
};
pub use envelope::{
    arrival_envelope, envelope_arrival_exponential, envelope_ideal_partition, envelope_overhead_fj,
    envelope_overhead_sm, envelope_rho_x, envelope_rho_z, envelope_service_exponential,
    envelope_splitmerge_big, envelope_splitmerge_big_erlang, envelope_splitmerge_tiny,
    rho_arrival_exponential, rho_service_exponential, rho_x, rho_z, service_envelope, Envelope,
    EnvelopeKind,
};
pub use erlang::{
    erlang_ccdf, erlang_cdf, expected_job_service_tiny, expected_max_erlang, harmonic,
    mgf_max_erlang, stability_big, stability_tiny,
};
pub use export::{
    stability_curve, write_bound_sweep_csv, write_stability_curve_csv, BoundSweepRow,
    StabilityCurveRow,
};
pub use params::ModelParams;

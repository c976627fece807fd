//! Scheduling and simulation of stream workflow applications on multicloud
//! environments.
//!
//! A stream workflow is a DAG of continuously running analytic services.
//! Each service consumes data streams (from external sources and from its
//! parents), processes them on a set of provisioned virtual machines, and
//! emits an output stream towards its children. This crate provides:
//!
//! * the workflow and multicloud environment models ([`workflow`], [`cloud`]),
//! * synthetic workflow generation from well-known scientific workflow
//!   shapes ([`generator`]),
//! * the steady-state cost model: per-VM processing rates, stream
//!   propagation, throughput constraints and the provisioning plus data
//!   transfer objective ([`cost`]),
//! * a greedy per-service scheduler and a genetic scheduler ([`greedy`],
//!   [`ga`]), together with a relaxed lower bound and a fair-share baseline
//!   ([`baselines`]),
//! * a discrete-time simulator validating throughput, drop, latency and
//!   cost behaviour of a schedule ([`sim`]).
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the CLI live
//! in the companion `streamsched-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod cloud;
pub mod cost;
pub mod ga;
pub mod generator;
pub mod greedy;
pub mod ranges;
pub mod sim;
pub mod workflow;

pub use cloud::{MulticloudEnv, NetworkRanges, VmOffer};
pub use cost::{Schedule, ServiceAssignment, SteadyState};
pub use ga::{GaConfig, GaResult};
pub use generator::{generate_workflow, Family, ParameterRanges, SizeClass};
pub use ranges::RangeLevel;
pub use sim::{SimulationConfig, SimulationMetrics};
pub use workflow::{EdgeSpec, Movability, ServiceSpec, StreamWorkflow, Topology};

/// Relative tolerance used for all rate and cost comparisons.
pub const REL_TOL: f64 = 1e-9;

/// `value >= bound` up to [`REL_TOL`] relative slack.
pub(crate) fn meets(value: f64, bound: f64) -> bool {
    value >= bound - REL_TOL * libm::fabs(bound)
}

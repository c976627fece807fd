//! Discrete-time simulation of a scheduled workflow.
//!
//! The simulator advances in one-second ticks. Each tick every service, in
//! topological order, receives its external stream plus whatever its
//! parents emitted in the previous tick, processes up to its provisioned
//! capacity (and declared maximum throughput, when present), drops the
//! excess immediately, and emits its output towards its out-edges with one
//! tick of pipeline delay. End-to-end latency chains each service's
//! processing time with the transfer time of its in-edges; costs come from
//! the cost model over the full duration.

use alloc::vec::Vec;
use core::fmt;

use crate::cloud::MulticloudEnv;
use crate::cost::{
    check_constraints, provisioning_cost, transfer_cost, ConstraintReport, CostError,
    Schedule, SteadyState,
};
use crate::workflow::{StreamWorkflow, Topology};

/// Simulation window. The tick is one second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub duration_s: u32,
    /// Ticks before this second are excluded from averaged metrics.
    pub warmup_s: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { duration_s: 180, warmup_s: 120 }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.warmup_s >= self.duration_s {
            return Err(SimError::InvalidConfig("warmup must be strictly below duration"));
        }
        Ok(())
    }
}

/// Simulation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidConfig(&'static str),
    /// The schedule violates scheduling constraints; carries the report.
    InvalidSchedule(ConstraintReport),
    Cost(CostError),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig(msg) => write!(f, "invalid simulation config: {msg}"),
            SimError::InvalidSchedule(report) => {
                write!(f, "schedule violates constraints: ")?;
                for (i, v) in report.violations.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            SimError::Cost(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SimError {}

impl From<CostError> for SimError {
    fn from(e: CostError) -> Self {
        SimError::Cost(e)
    }
}

/// Post-warmup averages and cost breakdown of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationMetrics {
    /// Mean processed volume per service in MB/s.
    pub processed_mb_s: Vec<f64>,
    /// Mean dropped volume per service in MB/s.
    pub dropped_mb_s: Vec<f64>,
    /// Mean end-to-end latency in seconds, taken over sink services.
    pub avg_latency_s: f64,
    pub provisioning_cost: f64,
    pub transfer_cost: f64,
    pub total_cost: f64,
}

/// Flow state of one service at one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub tick: u32,
    pub service: usize,
    pub arrivals: f64,
    pub processed: f64,
    pub dropped: f64,
    /// Latency of the output emitted this tick, zero when nothing was
    /// processed.
    pub latency: f64,
}

/// Simulates a constraint-clean schedule.
pub fn simulate(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    config: &SimulationConfig,
) -> Result<SimulationMetrics, SimError> {
    simulate_traced(workflow, topo, schedule, env, config).map(|(metrics, _)| metrics)
}

/// [`simulate`], additionally returning the per-tick per-service trace.
pub fn simulate_traced(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    config: &SimulationConfig,
) -> Result<(SimulationMetrics, Vec<TickRecord>), SimError> {
    config.validate()?;
    let report = check_constraints(workflow, topo, schedule, env);
    if !report.is_clean() {
        return Err(SimError::InvalidSchedule(report));
    }
    run(workflow, topo, schedule, env, config)
}

fn run(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    config: &SimulationConfig,
) -> Result<(SimulationMetrics, Vec<TickRecord>), SimError> {
    let n = workflow.services.len();
    let steady = SteadyState::evaluate(workflow, topo, schedule, env)?;
    let capacity: Vec<f64> = (0..n)
        .map(|s| match workflow.services[s].mu {
            Some(mu) => steady.aggregate_phi[s].min(mu),
            None => steady.aggregate_phi[s],
        })
        .collect();

    let sinks: Vec<usize> = topo.sinks().collect();
    let mut trace = Vec::with_capacity(n * config.duration_s as usize);

    // Streams in flight on each edge: volume delivered next tick and the
    // accumulated latency of that stream when it arrives.
    let mut delivery = alloc::vec![0.0f64; topo.edges.len()];
    let mut delivery_latency = alloc::vec![0.0f64; topo.edges.len()];
    let mut next_delivery = alloc::vec![0.0f64; topo.edges.len()];
    let mut next_delivery_latency = alloc::vec![0.0f64; topo.edges.len()];
    let mut latency_now = alloc::vec![0.0f64; n];

    let warmup_ticks = (config.duration_s - config.warmup_s) as f64;
    let mut processed_sum = alloc::vec![0.0f64; n];
    let mut dropped_sum = alloc::vec![0.0f64; n];
    let mut latency_sum = 0.0f64;

    for tick in 0..config.duration_s {
        for &s in &topo.order {
            let service = &workflow.services[s];
            let mut arrivals = service.lambda;
            let mut dependency_latency = 0.0f64;
            let mut has_input = service.lambda > 0.0;
            for &x in &topo.in_edges[s] {
                arrivals += delivery[x];
                if delivery[x] > 0.0 {
                    dependency_latency = dependency_latency.max(delivery_latency[x]);
                    has_input = true;
                }
            }
            let processed = arrivals.min(capacity[s]);
            let dropped = arrivals - processed;

            let processing_time = if processed > 0.0 && steady.aggregate_phi[s] > 0.0 {
                processed / steady.aggregate_phi[s]
            } else {
                0.0
            };
            latency_now[s] = if has_input && processed > 0.0 {
                dependency_latency + processing_time
            } else {
                0.0
            };

            let emitted = service.gamma * processed;
            let org_cloud = schedule.assignments[s].cloud;
            for &x in &topo.out_edges[s] {
                let edge = topo.edges[x];
                let volume = emitted * edge.share;
                let dest_cloud = schedule.assignments[edge.dest].cloud;
                let transfer_time = if org_cloud == dest_cloud || volume <= 0.0 {
                    0.0
                } else {
                    env.latency(org_cloud, dest_cloud) + volume / env.bandwidth(org_cloud, dest_cloud)
                };
                next_delivery[x] = volume;
                next_delivery_latency[x] = latency_now[s] + transfer_time;
            }

            trace.push(TickRecord { tick, service: s, arrivals, processed, dropped, latency: latency_now[s] });
            if tick >= config.warmup_s {
                processed_sum[s] += processed;
                dropped_sum[s] += dropped;
            }
        }

        if tick >= config.warmup_s {
            let tick_latency = sinks
                .iter()
                .map(|&s| latency_now[s])
                .fold(0.0f64, f64::max);
            latency_sum += tick_latency;
        }

        core::mem::swap(&mut delivery, &mut next_delivery);
        core::mem::swap(&mut delivery_latency, &mut next_delivery_latency);
    }

    let provisioning = provisioning_cost(schedule, env, config.duration_s as f64)?;
    let transfer = transfer_cost(workflow, topo, schedule, env, config.duration_s as f64)?;
    let metrics = SimulationMetrics {
        processed_mb_s: processed_sum.iter().map(|&v| v / warmup_ticks).collect(),
        dropped_mb_s: dropped_sum.iter().map(|&v| v / warmup_ticks).collect(),
        avg_latency_s: latency_sum / warmup_ticks,
        provisioning_cost: provisioning,
        transfer_cost: transfer,
        total_cost: provisioning + transfer,
    };
    Ok((metrics, trace))
}

/// Per-service comparison between simulated throughput and the analytic
/// steady-flow expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowComparison {
    pub service: usize,
    /// Post-warmup mean processed volume in MB/s.
    pub simulated: f64,
    /// Analytic steady throughput: the demand fixed point of the flow
    /// recurrence, clipped only by declared maximum throughputs.
    pub expected: f64,
    pub deviation: f64,
}

/// Report returned by [`steady_state_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub rows: Vec<FlowComparison>,
    /// Services whose simulated throughput deviates by more than 1e-6
    /// relative: the starved services and everything downstream of them.
    pub flagged: Vec<usize>,
}

impl FixedPointReport {
    pub fn is_clean(&self) -> bool {
        self.flagged.is_empty()
    }
}

const FIXED_POINT_TOL: f64 = 1e-6;

/// Simulates the schedule (without the constraint gate, so deliberately
/// under-provisioned schedules can be inspected) and compares each
/// service's measured throughput against the analytic demand fixed point.
/// Capacity-starved services and their descendants end up flagged.
pub fn steady_state_check(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    config: &SimulationConfig,
) -> Result<FixedPointReport, SimError> {
    config.validate()?;
    let (metrics, _) = run(workflow, topo, schedule, env, config)?;

    let n = workflow.services.len();
    let mut expected = alloc::vec![0.0f64; n];
    for &s in &topo.order {
        let service = &workflow.services[s];
        let mut input = service.lambda;
        for &x in &topo.in_edges[s] {
            let edge = topo.edges[x];
            input += workflow.services[edge.org].gamma * expected[edge.org] * edge.share;
        }
        expected[s] = match service.mu {
            Some(mu) => input.min(mu),
            None => input,
        };
    }

    let mut rows = Vec::with_capacity(n);
    let mut flagged = Vec::new();
    for s in 0..n {
        let simulated = metrics.processed_mb_s[s];
        let deviation = libm::fabs(simulated - expected[s]);
        if deviation > FIXED_POINT_TOL * expected[s].max(1.0) {
            flagged.push(s);
        }
        rows.push(FlowComparison { service: s, simulated, expected: expected[s], deviation });
    }
    Ok(FixedPointReport { rows, flagged })
}

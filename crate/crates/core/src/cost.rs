//! Steady-state cost model: per-VM processing rates, stream propagation,
//! throughput constraints and the provisioning + transfer objective.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cloud::{MulticloudEnv, VmOffer};
use crate::workflow::{Movability, StreamWorkflow, Topology};
use crate::{meets, REL_TOL};

/// Provisioning decision for one service: the cloud it runs on and the
/// multiset of selected VM offers (repetition allowed), as global ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceAssignment {
    pub cloud: usize,
    pub vms: Vec<usize>,
}

/// A complete resource selection: one assignment per service, indexed like
/// `StreamWorkflow::services`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub assignments: Vec<ServiceAssignment>,
}

impl Schedule {
    pub fn assignment(&self, service: usize) -> &ServiceAssignment {
        &self.assignments[service]
    }
}

/// Cost model failures.
#[derive(Debug, Clone, PartialEq)]
pub enum CostError {
    /// A VM cannot process even one minimum stream unit for the service.
    VmBelowMinimumUnit { service: String, vm: usize },
    /// A schedule references a VM id that does not exist in the environment.
    UnknownVm { service: String, vm: usize },
    /// The schedule does not cover every service of the workflow.
    WrongServiceCount { expected: usize, actual: usize },
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostError::VmBelowMinimumUnit { service, vm } => {
                write!(f, "VM {vm} is below the minimum unit requirement of service {service:?}")
            }
            CostError::UnknownVm { service, vm } => {
                write!(f, "service {service:?} references unknown VM id {vm}")
            }
            CostError::WrongServiceCount { expected, actual } => {
                write!(f, "schedule covers {actual} services, workflow has {expected}")
            }
        }
    }
}

impl core::error::Error for CostError {}

/// MIPS needed to process one minimum stream unit per second for a service.
pub fn unit_mips(service_mi: f64, unit_dp_rate: f64) -> f64 {
    unit_dp_rate * service_mi
}

/// Number of whole minimum units a VM processes per second for a service
/// with the given unit MIPS requirement.
pub(crate) fn whole_units(mips: f64, unit_mips: f64) -> u64 {
    libm::floor(mips / unit_mips) as u64
}

/// Smallest whole number of minimum units covering `rate`, tolerating
/// floating-point noise up to [`REL_TOL`].
pub(crate) fn ceil_units(rate: f64, unit_dp_rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let raw = rate / unit_dp_rate * (1.0 - REL_TOL);
    libm::ceil(raw) as u64
}

/// Data processing rate in MB/s a VM contributes to a service.
///
/// The rate is quantized to whole minimum stream units: a VM processes
/// `floor(mips / unit_mips)` units per second, each unit worth
/// `unit_mips / mi` MB/s.
pub fn processing_rate(
    service: &crate::workflow::ServiceSpec,
    vm: &VmOffer,
    unit_dp_rate: f64,
) -> Result<f64, CostError> {
    let chi = unit_mips(service.mi, unit_dp_rate);
    if vm.mips < chi {
        return Err(CostError::VmBelowMinimumUnit { service: service.id.clone(), vm: vm.global_id });
    }
    let units = libm::floor(vm.mips / chi);
    Ok(units * chi / service.mi)
}

/// Steady-state rates of a scheduled workflow, indexed by service.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Input stream in MB/s: external arrivals plus the shares of each
    /// parent's provisioned output capacity.
    pub in_rate: Vec<f64>,
    /// Output stream in MB/s: `gamma * in_rate`.
    pub out_rate: Vec<f64>,
    /// Required data processing rate in MB/s: the declared maximum
    /// throughput when present, the input stream otherwise.
    pub alpha: Vec<f64>,
    /// Total provisioned processing rate in MB/s.
    pub aggregate_phi: Vec<f64>,
}

impl SteadyState {
    /// Evaluates all steady-state rates in topological order, so every
    /// parent's provisioned capacity is known before its children.
    pub fn evaluate(
        workflow: &StreamWorkflow,
        topo: &Topology,
        schedule: &Schedule,
        env: &MulticloudEnv,
    ) -> Result<Self, CostError> {
        let n = workflow.services.len();
        if schedule.assignments.len() != n {
            return Err(CostError::WrongServiceCount { expected: n, actual: schedule.assignments.len() });
        }
        let mut state = SteadyState {
            in_rate: alloc::vec![0.0; n],
            out_rate: alloc::vec![0.0; n],
            alpha: alloc::vec![0.0; n],
            aggregate_phi: alloc::vec![0.0; n],
        };
        for &s in &topo.order {
            let service = &workflow.services[s];
            let mut phi = 0.0;
            for &vm in &schedule.assignments[s].vms {
                let offer = env
                    .offer(vm)
                    .ok_or(CostError::UnknownVm { service: service.id.clone(), vm })?;
                phi += processing_rate(service, offer, workflow.unit_dp_rate)?;
            }
            state.aggregate_phi[s] = phi;

            let mut input = service.lambda;
            for &x in &topo.in_edges[s] {
                let edge = topo.edges[x];
                let parent = &workflow.services[edge.org];
                input += parent.gamma * state.aggregate_phi[edge.org] * edge.share;
            }
            state.in_rate[s] = input;
            state.alpha[s] = service.mu.unwrap_or(input);
            state.out_rate[s] = service.gamma * input;
        }
        Ok(state)
    }
}

/// Input stream of one service under a schedule.
pub fn in_stream(
    service: usize,
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
) -> Result<f64, CostError> {
    Ok(SteadyState::evaluate(workflow, topo, schedule, env)?.in_rate[service])
}

/// Required data processing rate of one service: the declared maximum
/// throughput if present, the input stream otherwise.
pub fn required_rate(
    service: usize,
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
) -> Result<f64, CostError> {
    Ok(SteadyState::evaluate(workflow, topo, schedule, env)?.alpha[service])
}

/// Output stream of one service under a schedule.
pub fn out_stream(
    service: usize,
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
) -> Result<f64, CostError> {
    Ok(SteadyState::evaluate(workflow, topo, schedule, env)?.out_rate[service])
}

/// Cost in cents of running every provisioned VM for `horizon` seconds.
pub fn provisioning_cost(
    schedule: &Schedule,
    env: &MulticloudEnv,
    horizon: f64,
) -> Result<f64, CostError> {
    let mut per_second = 0.0;
    for (s, assignment) in schedule.assignments.iter().enumerate() {
        for &vm in &assignment.vms {
            let offer = env.offer(vm).ok_or_else(|| CostError::UnknownVm {
                service: alloc::format!("#{s}"),
                vm,
            })?;
            per_second += offer.price;
        }
    }
    Ok(horizon * per_second)
}

/// How much of a parent's output counts as moved volume on an edge whose
/// transfer factor does not throttle it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferVolume {
    /// The edge's share of the parent output moves. Consistent with the
    /// throttled branch, where the share is always applied.
    #[default]
    EdgeShare,
    /// The parent's full output stream moves regardless of the edge share.
    FullStream,
}

/// Per-edge transfer factor: transmission time plus latency for one second
/// worth of stream. Values above 1 throttle the effective moved volume.
fn transfer_factor(volume: f64, bandwidth: f64, latency: f64) -> f64 {
    volume / bandwidth + latency
}

/// Cost in cents of moving streams between clouds for `horizon` seconds.
///
/// Rates are constant at deployment time, so one second is costed and
/// scaled by the horizon. Intra-cloud edges are free.
pub fn transfer_cost(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    horizon: f64,
) -> Result<f64, CostError> {
    let steady = SteadyState::evaluate(workflow, topo, schedule, env)?;
    Ok(transfer_cost_with(workflow, topo, schedule, env, &steady, horizon, TransferVolume::default()))
}

/// [`transfer_cost`] against a precomputed steady state and an explicit
/// below-throttle volume policy.
pub fn transfer_cost_with(
    _workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    steady: &SteadyState,
    horizon: f64,
    volume: TransferVolume,
) -> f64 {
    let mut per_second = 0.0;
    for edge in &topo.edges {
        let org_cloud = schedule.assignments[edge.org].cloud;
        let dest_cloud = schedule.assignments[edge.dest].cloud;
        if org_cloud == dest_cloud {
            continue;
        }
        let out = steady.out_rate[edge.org];
        let routed = out * edge.share;
        let rho = transfer_factor(routed, env.bandwidth(org_cloud, dest_cloud), env.latency(org_cloud, dest_cloud));
        let moved = if rho <= 1.0 {
            match volume {
                TransferVolume::EdgeShare => routed,
                TransferVolume::FullStream => out,
            }
        } else {
            routed / rho
        };
        per_second += moved * env.transfer_cost(org_cloud, dest_cloud);
    }
    horizon * per_second
}

/// The scheduling objective in cents: provisioning plus transfer cost over
/// `horizon` seconds.
pub fn objective(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    horizon: f64,
) -> Result<f64, CostError> {
    objective_with(workflow, topo, schedule, env, horizon, TransferVolume::default())
}

/// [`objective`] with an explicit transfer volume policy.
pub fn objective_with(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
    horizon: f64,
    volume: TransferVolume,
) -> Result<f64, CostError> {
    let steady = SteadyState::evaluate(workflow, topo, schedule, env)?;
    let provisioning = provisioning_cost(schedule, env, horizon)?;
    let transfer = transfer_cost_with(workflow, topo, schedule, env, &steady, horizon, volume);
    Ok(provisioning + transfer)
}

/// One violated schedule constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    /// Aggregate provisioned rate below the required rate.
    InsufficientCapacity { service: String, aggregate_phi: f64, alpha: f64 },
    /// An unmovable service assigned away from its placement cloud.
    WrongPlacement { service: String, required: usize, assigned: usize },
    /// A VM provisioned from a cloud other than the service's assigned one.
    MixedClouds { service: String, vm: usize, vm_cloud: usize, assigned: usize },
    /// A VM that cannot process one minimum unit for its service.
    VmBelowUnit { service: String, vm: usize },
    /// A VM id that does not exist in the environment.
    UnknownVm { service: String, vm: usize },
    /// An assigned cloud index outside the environment.
    UnknownCloud { service: String, cloud: usize },
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintViolation::InsufficientCapacity { service, aggregate_phi, alpha } => write!(
                f,
                "service {service:?}: provisioned rate {aggregate_phi} below required rate {alpha}"
            ),
            ConstraintViolation::WrongPlacement { service, required, assigned } => write!(
                f,
                "service {service:?}: pinned to cloud {required} but assigned to cloud {assigned}"
            ),
            ConstraintViolation::MixedClouds { service, vm, vm_cloud, assigned } => write!(
                f,
                "service {service:?}: VM {vm} is from cloud {vm_cloud}, assignment is cloud {assigned}"
            ),
            ConstraintViolation::VmBelowUnit { service, vm } => {
                write!(f, "service {service:?}: VM {vm} below the minimum unit requirement")
            }
            ConstraintViolation::UnknownVm { service, vm } => {
                write!(f, "service {service:?}: unknown VM id {vm}")
            }
            ConstraintViolation::UnknownCloud { service, cloud } => {
                write!(f, "service {service:?}: unknown cloud {cloud}")
            }
        }
    }
}

/// Result of checking a schedule against every constraint.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintReport {
    pub violations: Vec<ConstraintViolation>,
}

impl ConstraintReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks throughput, placement, one-cloud and minimum-unit constraints.
///
/// Capacity is evaluated with parents' provisioned rates, so the check is
/// well-defined even for partially deficient schedules.
pub fn check_constraints(
    workflow: &StreamWorkflow,
    topo: &Topology,
    schedule: &Schedule,
    env: &MulticloudEnv,
) -> ConstraintReport {
    let mut violations = Vec::new();
    let n = workflow.services.len();
    if schedule.assignments.len() != n {
        // Without one assignment per service nothing else is checkable.
        violations.push(ConstraintViolation::UnknownCloud {
            service: alloc::format!("schedule covers {} of {} services", schedule.assignments.len(), n),
            cloud: usize::MAX,
        });
        return ConstraintReport { violations };
    }

    let mut aggregate_phi = alloc::vec![0.0; n];
    for &s in &topo.order {
        let service = &workflow.services[s];
        let assignment = &schedule.assignments[s];

        if assignment.cloud >= env.cloud_count() {
            violations.push(ConstraintViolation::UnknownCloud {
                service: service.id.clone(),
                cloud: assignment.cloud,
            });
        }
        if let Movability::Unmovable { cloud } = service.movability {
            if assignment.cloud != cloud {
                violations.push(ConstraintViolation::WrongPlacement {
                    service: service.id.clone(),
                    required: cloud,
                    assigned: assignment.cloud,
                });
            }
        }

        let chi = unit_mips(service.mi, workflow.unit_dp_rate);
        let mut phi = 0.0;
        for &vm in &assignment.vms {
            match env.offer(vm) {
                None => violations.push(ConstraintViolation::UnknownVm {
                    service: service.id.clone(),
                    vm,
                }),
                Some(offer) => {
                    if offer.cloud_id != assignment.cloud {
                        violations.push(ConstraintViolation::MixedClouds {
                            service: service.id.clone(),
                            vm,
                            vm_cloud: offer.cloud_id,
                            assigned: assignment.cloud,
                        });
                    }
                    if offer.mips < chi {
                        violations.push(ConstraintViolation::VmBelowUnit {
                            service: service.id.clone(),
                            vm,
                        });
                    } else {
                        phi += libm::floor(offer.mips / chi) * chi / service.mi;
                    }
                }
            }
        }
        aggregate_phi[s] = phi;

        let mut input = service.lambda;
        for &x in &topo.in_edges[s] {
            let edge = topo.edges[x];
            input += workflow.services[edge.org].gamma * aggregate_phi[edge.org] * edge.share;
        }
        let alpha = service.mu.unwrap_or(input);
        if !meets(phi, alpha) {
            violations.push(ConstraintViolation::InsufficientCapacity {
                service: service.id.clone(),
                aggregate_phi: phi,
                alpha,
            });
        }
    }
    ConstraintReport { violations }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::cloud::{NetworkMatrices, OfferSpec};
    use crate::workflow::{EdgeSpec, ServiceSpec};
    use alloc::string::ToString;
    use alloc::vec;

    pub fn service(id: &str, mi: f64, lambda: f64, gamma: f64) -> ServiceSpec {
        ServiceSpec {
            id: id.to_string(),
            mi,
            lambda,
            gamma,
            movability: Movability::Movable,
            mu: None,
        }
    }

    pub fn edge(org: &str, dest: &str, share: f64) -> EdgeSpec {
        EdgeSpec { org: org.to_string(), dest: dest.to_string(), share }
    }

    /// Two clouds, two offers each. Offer 0 is an m4.large-shaped VM.
    pub fn two_cloud_env(bandwidth: f64, latency: f64, transfer: f64) -> MulticloudEnv {
        let clouds = vec![
            vec![
                OfferSpec::new("a.large", 7000.0, 0.0054, 8.0),
                OfferSpec::new("a.xlarge", 13000.0, 0.0107, 16.0),
            ],
            vec![
                OfferSpec::new("b.small", 2500.0, 0.0035, 4.0),
                OfferSpec::new("b.large", 8000.0, 0.0054, 8.0),
            ],
        ];
        let network = NetworkMatrices {
            latency: vec![vec![0.0005, latency], vec![latency, 0.0005]],
            bandwidth: vec![vec![800.0, bandwidth], vec![bandwidth, 800.0]],
            transfer_cost: vec![vec![0.0, transfer], vec![transfer, 0.0]],
        };
        MulticloudEnv::new(clouds, network).unwrap()
    }

    pub fn assign(cloud: usize, vms: &[usize]) -> ServiceAssignment {
        ServiceAssignment { cloud, vms: vms.to_vec() }
    }
}

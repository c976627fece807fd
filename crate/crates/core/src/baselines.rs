//! Comparison anchors: a relaxed cost lower bound and a fair-share
//! scheduler.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cloud::{MulticloudEnv, NetworkRanges, VmOffer};
use crate::cost::{unit_mips, whole_units, Schedule, ServiceAssignment};
use crate::meets;
use crate::workflow::{Movability, StreamWorkflow, Topology};

/// Baseline failures.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineError {
    /// No offer anywhere can process one minimum unit for the service.
    NoFeasibleOffer { service: String },
    /// The reference offer cannot process one minimum unit for the service.
    ReferenceBelowUnit { service: String, reference: usize },
    /// An unmovable service's placement cloud offers nothing feasible.
    NoFeasibleOfferInCloud { service: String, cloud: usize },
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::NoFeasibleOffer { service } => {
                write!(f, "no offer can process one minimum unit for service {service:?}")
            }
            BaselineError::ReferenceBelowUnit { service, reference } => write!(
                f,
                "reference offer {reference} cannot process one minimum unit for service {service:?}"
            ),
            BaselineError::NoFeasibleOfferInCloud { service, cloud } => {
                write!(f, "no feasible offer for service {service:?} in its placement cloud {cloud}")
            }
        }
    }
}

impl core::error::Error for BaselineError {}

/// A deliberately relaxed, generally unachievable cost floor in cents.
///
/// Placement and one-cloud constraints are ignored, and per-service
/// provisioning is relaxed to fractional capacity: each service is charged
/// its required rate times the best price-per-rate ratio over every
/// feasible offer of every cloud, so no feasible schedule can provision the
/// service for less. Required rates are propagated with exactly matching
/// capacity (no quantization overshoot), which keeps the downstream demand
/// at its minimum.
///
/// Transfer cost is kept only where every feasible schedule must pay it:
/// edges whose endpoints are both unmovable and pinned to different clouds.
/// Those edges are charged at the studied range's minimum transfer cost,
/// with the moved volume throttled by the range's minimum bandwidth and
/// maximum latency ("transferring less data").
pub fn lower_bound_cost(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    ranges: &NetworkRanges,
    horizon: f64,
) -> Result<f64, BaselineError> {
    let n = workflow.services.len();
    let mut alpha = alloc::vec![0.0; n];
    let mut out_rate = alloc::vec![0.0; n];
    let mut provisioning_per_second = 0.0;

    for &s in &topo.order {
        let service = &workflow.services[s];
        let chi = unit_mips(service.mi, workflow.unit_dp_rate);

        let mut input = service.lambda;
        for &x in &topo.in_edges[s] {
            let edge = topo.edges[x];
            // Parents provide exactly their required rate in this
            // relaxation.
            input += workflow.services[edge.org].gamma * alpha[edge.org] * edge.share;
        }
        alpha[s] = service.mu.unwrap_or(input);
        out_rate[s] = service.gamma * input;

        let best_ratio = env
            .offers()
            .iter()
            .filter(|o| o.mips >= chi)
            .map(|o| {
                let rate = whole_units(o.mips, chi) as f64 * chi / service.mi;
                o.price / rate
            })
            .min_by(f64::total_cmp)
            .ok_or_else(|| BaselineError::NoFeasibleOffer { service: service.id.clone() })?;
        provisioning_per_second += alpha[s] * best_ratio;
    }

    // Unavoidable cross-cloud edges, costed at the most favourable corner
    // of the studied ranges.
    let min_cost = ranges.transfer_cost.0;
    let min_bandwidth = ranges.egress_bandwidth.0;
    let max_latency = ranges.egress_latency.1;
    let mut transfer_per_second = 0.0;
    for edge in &topo.edges {
        let org = &workflow.services[edge.org];
        let dest = &workflow.services[edge.dest];
        let (Movability::Unmovable { cloud: org_cloud }, Movability::Unmovable { cloud: dest_cloud }) =
            (org.movability, dest.movability)
        else {
            continue;
        };
        if org_cloud == dest_cloud {
            continue;
        }
        let routed = out_rate[edge.org] * edge.share;
        let rho = routed / min_bandwidth + max_latency;
        let moved = if rho <= 1.0 { routed } else { routed / rho };
        transfer_per_second += moved * min_cost;
    }

    Ok(horizon * (provisioning_per_second + transfer_per_second))
}

/// The environment's default fair-share reference offer: the offer with the
/// median MIPS rating, ties resolved towards the lower global id.
pub fn default_reference_offer(env: &MulticloudEnv) -> &VmOffer {
    let mut sorted: Vec<&VmOffer> = env.offers().iter().collect();
    sorted.sort_by(|a, b| a.mips.total_cmp(&b.mips).then(a.global_id.cmp(&b.global_id)));
    sorted[sorted.len() / 2]
}

/// Provisions the same reference VM type for every movable service, as a
/// stand-in for fair scheduling. Unmovable services receive the feasible
/// offer of their placement cloud whose MIPS is closest to the reference
/// (ties towards the cheaper offer). Each service gets as many copies as
/// its required rate demands, and at least one.
pub fn fair_share_schedule(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    reference: &VmOffer,
) -> Result<Schedule, BaselineError> {
    let n = workflow.services.len();
    let mut assignments: Vec<Option<ServiceAssignment>> = alloc::vec![None; n];
    let mut aggregate_phi = alloc::vec![0.0; n];

    for &s in &topo.order {
        let service = &workflow.services[s];
        let chi = unit_mips(service.mi, workflow.unit_dp_rate);

        let mut input = service.lambda;
        for &x in &topo.in_edges[s] {
            let edge = topo.edges[x];
            input += workflow.services[edge.org].gamma * aggregate_phi[edge.org] * edge.share;
        }
        let alpha = service.mu.unwrap_or(input);

        let offer = match service.movability {
            Movability::Movable => {
                if reference.mips < chi {
                    return Err(BaselineError::ReferenceBelowUnit {
                        service: service.id.clone(),
                        reference: reference.global_id,
                    });
                }
                reference
            }
            Movability::Unmovable { cloud } => env
                .offers_in_cloud(cloud)
                .filter(|o| o.mips >= chi)
                .min_by(|a, b| {
                    libm::fabs(a.mips - reference.mips)
                        .total_cmp(&libm::fabs(b.mips - reference.mips))
                        .then(a.price.total_cmp(&b.price))
                        .then(a.global_id.cmp(&b.global_id))
                })
                .ok_or_else(|| BaselineError::NoFeasibleOfferInCloud {
                    service: service.id.clone(),
                    cloud,
                })?,
        };

        let rate = whole_units(offer.mips, chi) as f64 * chi / service.mi;
        let mut vms = Vec::new();
        let mut phi = 0.0;
        while vms.is_empty() || !meets(phi, alpha) {
            vms.push(offer.global_id);
            phi += rate;
        }
        aggregate_phi[s] = phi;
        assignments[s] = Some(ServiceAssignment { cloud: offer.cloud_id, vms });
    }

    Ok(Schedule {
        assignments: assignments.into_iter().map(|a| a.expect("all services assigned")).collect(),
    })
}

//! Greedy per-service VM selection.
//!
//! Services are processed in topological order so that every child's
//! required rate is computed against its parents' already-provisioned
//! capacity. For each service every admissible cloud is evaluated
//! independently: offers are picked one at a time by descending value until
//! the remaining unit requirement is covered, and the cheapest cloud bundle
//! wins.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cloud::{MulticloudEnv, VmOffer};
use crate::cost::{ceil_units, unit_mips, whole_units, Schedule, ServiceAssignment};
use crate::workflow::{Movability, StreamWorkflow, Topology};

/// Greedy scheduling failures.
#[derive(Debug, Clone, PartialEq)]
pub enum GreedyError {
    /// No admissible cloud offers a VM able to process one minimum unit
    /// for the service. For unmovable services the cloud is the placement
    /// cloud; for movable services every cloud was tried.
    NoFeasibleOffer { service: String, cloud: Option<usize> },
}

impl fmt::Display for GreedyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GreedyError::NoFeasibleOffer { service, cloud: Some(cloud) } => {
                write!(f, "no feasible VM offer for service {service:?} in its placement cloud {cloud}")
            }
            GreedyError::NoFeasibleOffer { service, cloud: None } => {
                write!(f, "no cloud offers a feasible VM for service {service:?}")
            }
        }
    }
}

impl core::error::Error for GreedyError {}

/// One offer selection while covering a service's unit requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStep {
    pub global_id: usize,
    /// Units still required after this selection.
    pub remaining_units: u64,
}

/// Evaluation of one candidate cloud for one service.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudEvaluation {
    pub cloud: usize,
    pub steps: Vec<SelectionStep>,
    /// Summed per-second price of the selected bundle.
    pub bundle_price: f64,
}

/// Per-service record of what the greedy pass considered and chose.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceTrace {
    pub service: String,
    pub required_units: u64,
    pub evaluated: Vec<CloudEvaluation>,
    pub chosen_cloud: usize,
    pub chosen_price: f64,
}

/// Full trace of a greedy run, in scheduling order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyTrace {
    pub services: Vec<ServiceTrace>,
}

/// Value of selecting `offer` while `req_units` minimum units are still
/// uncovered.
///
/// The first term rewards covering the remaining requirement cheaply; the
/// second rewards capacity to absorb the service's dependency streams and is
/// dropped for services without in-edges. Free offers are treated as
/// infinitely valuable and selected first.
pub fn vm_value(offer: &VmOffer, req_units: u64, unit_mips: f64, dependency_count: usize) -> f64 {
    if offer.price == 0.0 {
        return f64::INFINITY;
    }
    let portions = libm::floor(offer.mips / unit_mips);
    let mut value = (portions / req_units as f64) / offer.price;
    if dependency_count > 0 {
        value += libm::floor(offer.mips / (unit_mips * dependency_count as f64)) / offer.price;
    }
    value
}

/// Runs the greedy selection and returns the schedule.
pub fn greedy_schedule(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
) -> Result<Schedule, GreedyError> {
    greedy_schedule_traced(workflow, topo, env).map(|(schedule, _)| schedule)
}

/// Runs the greedy selection and also returns the per-service trace.
pub fn greedy_schedule_traced(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
) -> Result<(Schedule, GreedyTrace), GreedyError> {
    let n = workflow.services.len();
    let mut assignments: Vec<Option<ServiceAssignment>> = alloc::vec![None; n];
    let mut aggregate_phi = alloc::vec![0.0; n];
    let mut trace = GreedyTrace::default();

    for &s in &topo.order {
        let service = &workflow.services[s];
        let chi = unit_mips(service.mi, workflow.unit_dp_rate);

        let mut input = service.lambda;
        for &x in &topo.in_edges[s] {
            let edge = topo.edges[x];
            input += workflow.services[edge.org].gamma * aggregate_phi[edge.org] * edge.share;
        }
        let alpha = service.mu.unwrap_or(input);
        let required_units = ceil_units(alpha, workflow.unit_dp_rate);
        let dependency_count = topo.dependency_count(s);

        let clouds: Vec<usize> = match service.movability {
            Movability::Unmovable { cloud } => alloc::vec![cloud],
            Movability::Movable => (0..env.cloud_count()).collect(),
        };

        let mut best: Option<(usize, Vec<usize>, f64)> = None;
        let mut evaluated = Vec::new();
        for cloud in clouds {
            let feasible: Vec<&VmOffer> =
                env.offers_in_cloud(cloud).filter(|o| o.mips >= chi).collect();
            if feasible.is_empty() {
                if let Movability::Unmovable { .. } = service.movability {
                    return Err(GreedyError::NoFeasibleOffer {
                        service: service.id.clone(),
                        cloud: Some(cloud),
                    });
                }
                continue;
            }

            let (bundle, steps) = cover_requirement(&feasible, required_units, chi, dependency_count);
            let bundle_price: f64 = bundle.iter().map(|&id| env.offer(id).unwrap().price).sum();
            evaluated.push(CloudEvaluation { cloud, steps, bundle_price });

            let better = match &best {
                None => true,
                Some((_, _, price)) => bundle_price < *price,
            };
            if better {
                best = Some((cloud, bundle, bundle_price));
            }
        }

        let (cloud, vms, price) = best.ok_or_else(|| GreedyError::NoFeasibleOffer {
            service: service.id.clone(),
            cloud: None,
        })?;
        for &vm in &vms {
            let offer = env.offer(vm).unwrap();
            aggregate_phi[s] += whole_units(offer.mips, chi) as f64 * chi / service.mi;
        }
        trace.services.push(ServiceTrace {
            service: service.id.clone(),
            required_units,
            evaluated,
            chosen_cloud: cloud,
            chosen_price: price,
        });
        assignments[s] = Some(ServiceAssignment { cloud, vms });
    }

    let schedule = Schedule {
        assignments: assignments.into_iter().map(|a| a.expect("all services scheduled")).collect(),
    };
    Ok((schedule, trace))
}

/// Covers `required_units` with offers from one cloud, highest value first.
/// Services with nothing to process still get one smallest feasible VM so
/// they exist at runtime.
fn cover_requirement(
    feasible: &[&VmOffer],
    required_units: u64,
    chi: f64,
    dependency_count: usize,
) -> (Vec<usize>, Vec<SelectionStep>) {
    let mut bundle = Vec::new();
    let mut steps = Vec::new();

    if required_units == 0 {
        let cheapest = feasible
            .iter()
            .min_by(|a, b| {
                a.price
                    .total_cmp(&b.price)
                    .then(a.mips.total_cmp(&b.mips))
                    .then(a.global_id.cmp(&b.global_id))
            })
            .expect("feasible set is non-empty");
        bundle.push(cheapest.global_id);
        steps.push(SelectionStep { global_id: cheapest.global_id, remaining_units: 0 });
        return (bundle, steps);
    }

    let mut remaining = required_units;
    while remaining > 0 {
        let selected = feasible
            .iter()
            .max_by(|a, b| {
                vm_value(a, remaining, chi, dependency_count)
                    .total_cmp(&vm_value(b, remaining, chi, dependency_count))
                    // Ties: cheaper offer first, then lowest global id.
                    .then(b.price.total_cmp(&a.price))
                    .then(b.global_id.cmp(&a.global_id))
            })
            .expect("feasible set is non-empty");
        bundle.push(selected.global_id);
        remaining = remaining.saturating_sub(whole_units(selected.mips, chi));
        steps.push(SelectionStep { global_id: selected.global_id, remaining_units: remaining });
    }
    (bundle, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{NetworkMatrices, OfferSpec};
    use crate::cost::testutil::{edge, service};
    use crate::cost::{check_constraints, SteadyState};
    use crate::workflow::ServiceSpec;
    use alloc::vec;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "expected {b}, got {a}");
    }

    fn single_cloud_env(offers: Vec<OfferSpec>) -> MulticloudEnv {
        let network = NetworkMatrices {
            latency: vec![vec![0.0005]],
            bandwidth: vec![vec![800.0]],
            transfer_cost: vec![vec![0.0]],
        };
        MulticloudEnv::new(vec![offers], network).unwrap()
    }

    #[test]
    fn vm_value_hand_cases() {
        let offer = VmOffer {
            global_id: 0,
            cloud_id: 0,
            type_name: "x".into(),
            mips: 7000.0,
            price: 0.0054,
            memory_gb: 1.0,
        };
        close(vm_value(&offer, 1, 1000.0, 0), 7.0 / 0.0054);
        close(vm_value(&offer, 7, 1000.0, 7), 1.0 / 0.0054 + 1.0 / 0.0054);

        let exact = VmOffer { mips: 1000.0, price: 0.002, ..offer };
        close(vm_value(&exact, 1, 1000.0, 0), 1.0 / 0.002);

        let free = VmOffer { price: 0.0, ..exact };
        assert_eq!(vm_value(&free, 1, 1000.0, 0), f64::INFINITY);
    }

    #[test]
    fn picks_highest_value_offer() {
        // alpha = 1 unit of 1 MB/s at mi = 1000: A covers 7 units at value
        // ~1296, B covers 2 at ~571, so A wins despite costing more.
        let env = single_cloud_env(vec![
            OfferSpec::new("A", 7000.0, 0.0054, 1.0),
            OfferSpec::new("B", 2500.0, 0.0035, 1.0),
        ]);
        let wf = StreamWorkflow {
            services: vec![service("S", 1000.0, 1.0, 1.0)],
            edges: vec![],
            unit_dp_rate: 1.0,
        };
        let topo = Topology::build(&wf).unwrap();
        let (schedule, trace) = greedy_schedule_traced(&wf, &topo, &env).unwrap();
        assert_eq!(schedule.assignments[0].vms, vec![0]);
        assert_eq!(trace.services[0].required_units, 1);
        assert_eq!(trace.services[0].evaluated.len(), 1);
    }

    #[test]
    fn unmovable_service_only_evaluates_its_placement_cloud() {
        let clouds = vec![
            vec![OfferSpec::new("a", 4000.0, 0.004, 1.0)],
            vec![OfferSpec::new("b", 4000.0, 0.004, 1.0)],
            vec![OfferSpec::new("c", 4000.0, 0.004, 1.0)],
        ];
        let network = NetworkMatrices {
            latency: vec![vec![0.001; 3]; 3],
            bandwidth: vec![vec![500.0; 3]; 3],
            transfer_cost: (0..3)
                .map(|i| (0..3).map(|j| if i == j { 0.0 } else { 0.01 }).collect())
                .collect(),
        };
        let env = MulticloudEnv::new(clouds, network).unwrap();
        let wf = StreamWorkflow {
            services: vec![ServiceSpec {
                movability: Movability::Unmovable { cloud: 2 },
                ..service("S", 1000.0, 1.0, 1.0)
            }],
            edges: vec![],
            unit_dp_rate: 1.0,
        };
        let topo = Topology::build(&wf).unwrap();
        let (schedule, trace) = greedy_schedule_traced(&wf, &topo, &env).unwrap();
        assert_eq!(schedule.assignments[0].cloud, 2);
        assert_eq!(trace.services[0].evaluated.len(), 1);
        assert_eq!(trace.services[0].evaluated[0].cloud, 2);
    }

    #[test]
    fn idle_service_gets_one_smallest_feasible_vm() {
        // Child has no external source and its only parent emits nothing
        // (gamma = 0), so alpha = 0. It still gets the cheapest feasible VM.
        let env = single_cloud_env(vec![
            OfferSpec::new("big", 9000.0, 0.009, 1.0),
            OfferSpec::new("small", 1500.0, 0.002, 1.0),
        ]);
        let wf = StreamWorkflow {
            services: vec![
                ServiceSpec { gamma: 0.0, ..service("P", 1000.0, 3.0, 0.0) },
                service("C", 1000.0, 0.0, 1.0),
            ],
            edges: vec![edge("P", "C", 1.0)],
            unit_dp_rate: 1.0,
        };
        let topo = Topology::build(&wf).unwrap();
        let (schedule, trace) = greedy_schedule_traced(&wf, &topo, &env).unwrap();
        let c = wf.service_index("C").unwrap();
        assert_eq!(schedule.assignments[c].vms, vec![1]);
        let c_trace = trace.services.iter().find(|t| t.service == "C").unwrap();
        assert_eq!(c_trace.required_units, 0);
    }

    #[test]
    fn fails_when_placement_cloud_has_no_feasible_offer() {
        let clouds = vec![
            vec![OfferSpec::new("big", 90000.0, 0.09, 1.0)],
            vec![OfferSpec::new("tiny", 1000.0, 0.001, 1.0)],
        ];
        let network = NetworkMatrices {
            latency: vec![vec![0.001; 2]; 2],
            bandwidth: vec![vec![500.0; 2]; 2],
            transfer_cost: vec![vec![0.0, 0.01], vec![0.01, 0.0]],
        };
        let env = MulticloudEnv::new(clouds, network).unwrap();
        let wf = StreamWorkflow {
            services: vec![ServiceSpec {
                movability: Movability::Unmovable { cloud: 1 },
                ..service("S", 2000.0, 1.0, 1.0)
            }],
            edges: vec![],
            unit_dp_rate: 1.0,
        };
        let topo = Topology::build(&wf).unwrap();
        match greedy_schedule(&wf, &topo, &env) {
            Err(GreedyError::NoFeasibleOffer { cloud: Some(1), .. }) => {}
            other => panic!("expected NoFeasibleOffer, got {other:?}"),
        }

        // The same service movable skips cloud 1 and lands in cloud 0.
        let mut wf2 = wf;
        wf2.services[0].movability = Movability::Movable;
        let topo2 = Topology::build(&wf2).unwrap();
        let schedule = greedy_schedule(&wf2, &topo2, &env).unwrap();
        assert_eq!(schedule.assignments[0].cloud, 0);
    }

    #[test]
    fn output_is_constraint_clean_and_deterministic() {
        let env = crate::cloud::build_reference_environment();
        let wf = StreamWorkflow {
            services: vec![
                service("src_a", 1500.0, 6.0, 0.8),
                service("src_b", 2400.0, 4.5, 1.2),
                service("mid", 1800.0, 0.0, 0.6),
                service("sink", 2000.0, 0.0, 1.0),
            ],
            edges: vec![
                edge("src_a", "mid", 1.0),
                edge("src_b", "mid", 0.5),
                edge("mid", "sink", 1.0),
            ],
            unit_dp_rate: 1.3,
        };
        let topo = Topology::build(&wf).unwrap();
        let a = greedy_schedule(&wf, &topo, &env).unwrap();
        let b = greedy_schedule(&wf, &topo, &env).unwrap();
        assert_eq!(a, b);

        let report = check_constraints(&wf, &topo, &a, &env);
        assert!(report.is_clean(), "{report:?}");

        let steady = SteadyState::evaluate(&wf, &topo, &a, &env).unwrap();
        for s in 0..wf.services.len() {
            assert!(steady.aggregate_phi[s] >= steady.alpha[s] - 1e-9);
        }
    }

    #[test]
    fn trace_remaining_units_strictly_decrease() {
        let env = crate::cloud::build_reference_environment();
        let wf = StreamWorkflow {
            services: vec![service("S", 2674.0, 12.5, 1.0)],
            edges: vec![],
            unit_dp_rate: 0.7,
        };
        let topo = Topology::build(&wf).unwrap();
        let (_, trace) = greedy_schedule_traced(&wf, &topo, &env).unwrap();
        for service_trace in &trace.services {
            for evaluation in &service_trace.evaluated {
                let mut last = service_trace.required_units;
                for step in &evaluation.steps {
                    assert!(step.remaining_units < last || service_trace.required_units == 0);
                    last = step.remaining_units;
                }
                assert_eq!(last, 0);
            }
        }
    }
}

//! Acceptance suite: one test per acceptance criterion, each printing its
//! verdict (run with `--nocapture` to see the lines; the harness result per
//! test mirrors them).

use std::sync::OnceLock;
use std::time::Instant;

use streamsched_cli::experiment::{run_scenario, write_results_csv, ScenarioSpec};
use streamsched_core::baselines::{default_reference_offer, fair_share_schedule, lower_bound_cost};
use streamsched_core::cloud::{
    build_reference_environment, reference_environment, MulticloudEnv, NetworkMatrices,
    NetworkRanges, OfferSpec,
};
use streamsched_core::cost::{
    check_constraints, objective, processing_rate, provisioning_cost, transfer_cost, Schedule,
    ServiceAssignment, SteadyState,
};
use streamsched_core::ga::{ga_schedule, GaConfig};
use streamsched_core::generator::{generate_workflow, Family, ParameterRanges, SizeClass};
use streamsched_core::greedy::greedy_schedule;
use streamsched_core::sim::{simulate, simulate_traced, steady_state_check, SimulationConfig};
use streamsched_core::workflow::{EdgeSpec, Movability, ServiceSpec, StreamWorkflow, Topology};
use streamsched_core::RangeLevel;

const REL: f64 = 1e-9;

fn close(actual: f64, expected: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= REL * expected.abs().max(1e-12),
        "{what}: expected {expected}, got {actual}"
    );
}

fn leq(a: f64, b: f64) -> bool {
    a <= b * (1.0 + REL) + 1e-12
}

fn service(id: &str, mi: f64, lambda: f64, gamma: f64) -> ServiceSpec {
    ServiceSpec {
        id: id.to_string(),
        mi,
        lambda,
        gamma,
        movability: Movability::Movable,
        mu: None,
    }
}

fn edge(org: &str, dest: &str, share: f64) -> EdgeSpec {
    EdgeSpec { org: org.to_string(), dest: dest.to_string(), share }
}

fn two_cloud_env(bandwidth: f64, latency: f64, transfer: f64) -> MulticloudEnv {
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

// ---------------------------------------------------------------------
// Criterion 1: the cost-model equations reproduce hand-computed values.
// ---------------------------------------------------------------------

#[test]
fn criterion_1_equation_unit_suite() {
    let started = Instant::now();
    let env = two_cloud_env(200.0, 0.02, 0.01);

    // Per-VM processing rate: quantized to whole minimum units.
    let s = service("A", 1000.0, 1.0, 1.0);
    close(processing_rate(&s, env.offer(0).unwrap(), 0.5).unwrap(), 7.0, "rate 7000 MIPS");
    let exact = streamsched_core::VmOffer {
        global_id: 9,
        cloud_id: 0,
        type_name: "exact".into(),
        mips: 1000.0,
        price: 0.001,
        memory_gb: 1.0,
    };
    close(processing_rate(&s, &exact, 1.0).unwrap(), 1.0, "one-unit boundary");
    let tight = service("T", 2000.0, 1.0, 1.0);
    let small = streamsched_core::VmOffer { mips: 1999.0, ..exact.clone() };
    assert!(processing_rate(&tight, &small, 1.0).is_err(), "sub-unit VM must be rejected");

    // Input stream propagation over provisioned parent capacity.
    let wf = StreamWorkflow {
        services: vec![service("P", 1000.0, 4.0, 0.5), service("C", 1000.0, 2.0, 1.0)],
        edges: vec![edge("P", "C", 1.0)],
        unit_dp_rate: 1.0,
    };
    let topo = Topology::build(&wf).unwrap();
    let sched = Schedule {
        assignments: vec![
            ServiceAssignment { cloud: 1, vms: vec![3] },
            ServiceAssignment { cloud: 1, vms: vec![3] },
        ],
    };
    let state = SteadyState::evaluate(&wf, &topo, &sched, &env).unwrap();
    close(state.in_rate[1], 6.0, "lambda 2 + 0.5 * 8");
    close(state.out_rate[1], 6.0, "gamma 1.0 output");
    close(state.out_rate[0], 2.0, "gamma 0.5 output");

    let solo = StreamWorkflow {
        services: vec![service("A", 1000.0, 3.3, 1.0)],
        edges: vec![],
        unit_dp_rate: 1.0,
    };
    let solo_topo = Topology::build(&solo).unwrap();
    let solo_sched = Schedule { assignments: vec![ServiceAssignment { cloud: 0, vms: vec![0] }] };
    let solo_state = SteadyState::evaluate(&solo, &solo_topo, &solo_sched, &env).unwrap();
    close(solo_state.in_rate[0], 3.3, "no-parent input is lambda");

    let joined = StreamWorkflow {
        services: vec![
            service("X", 2000.0, 1.0, 1.0),
            service("Y", 8000.0, 1.0, 2.0),
            service("Z", 1000.0, 0.0, 1.0),
        ],
        edges: vec![edge("X", "Z", 0.5), edge("Y", "Z", 1.0)],
        unit_dp_rate: 1.0,
    };
    let joined_topo = Topology::build(&joined).unwrap();
    let joined_sched = Schedule {
        assignments: vec![
            ServiceAssignment { cloud: 1, vms: vec![3] },
            ServiceAssignment { cloud: 1, vms: vec![3] },
            ServiceAssignment { cloud: 1, vms: vec![3] },
        ],
    };
    let joined_state = SteadyState::evaluate(&joined, &joined_topo, &joined_sched, &env).unwrap();
    close(joined_state.in_rate[2], 4.0, "two-parent join");

    // Provisioning cost.
    let pair = Schedule {
        assignments: vec![
            ServiceAssignment { cloud: 0, vms: vec![0] },
            ServiceAssignment { cloud: 0, vms: vec![0] },
        ],
    };
    close(provisioning_cost(&pair, &env, 180.0).unwrap(), 1.944, "two m4.large-priced VMs");
    close(provisioning_cost(&pair, &env, 0.0).unwrap(), 0.0, "zero horizon");
    let empty = Schedule { assignments: vec![] };
    close(provisioning_cost(&empty, &env, 180.0).unwrap(), 0.0, "empty schedule");

    // Transfer cost with and without throttling.
    let stream = |rate: f64| StreamWorkflow {
        services: vec![
            ServiceSpec { mu: Some(rate), ..service("P", 1000.0, rate, 1.0) },
            ServiceSpec { mu: Some(1.0), ..service("C", 1000.0, 0.0, 1.0) },
        ],
        edges: vec![edge("P", "C", 1.0)],
        unit_dp_rate: 1.0,
    };
    let cross = Schedule {
        assignments: vec![
            ServiceAssignment { cloud: 0, vms: vec![0, 0] },
            ServiceAssignment { cloud: 1, vms: vec![] },
        ],
    };
    let flow = stream(100.0);
    let flow_topo = Topology::build(&flow).unwrap();
    close(transfer_cost(&flow, &flow_topo, &cross, &env, 180.0).unwrap(), 180.0, "unthrottled edge");

    let same_cloud = Schedule {
        assignments: vec![
            ServiceAssignment { cloud: 0, vms: vec![0, 0] },
            ServiceAssignment { cloud: 0, vms: vec![] },
        ],
    };
    close(transfer_cost(&flow, &flow_topo, &same_cloud, &env, 180.0).unwrap(), 0.0, "same cloud");

    let heavy = stream(300.0);
    let heavy_topo = Topology::build(&heavy).unwrap();
    close(
        transfer_cost(&heavy, &heavy_topo, &cross, &env, 1.0).unwrap(),
        300.0 / 1.52 * 0.01,
        "throttled edge",
    );

    // Objective: provisioning plus transfer; linear in the horizon.
    close(objective(&flow, &flow_topo, &cross, &env, 180.0).unwrap(), 181.944, "combined objective");
    close(
        objective(&solo, &solo_topo, &solo_sched, &env, 180.0).unwrap(),
        provisioning_cost(&solo_sched, &env, 180.0).unwrap(),
        "isolated service",
    );
    let once = objective(&flow, &flow_topo, &cross, &env, 180.0).unwrap();
    let twice = objective(&flow, &flow_topo, &cross, &env, 360.0).unwrap();
    close(twice, 2.0 * once, "horizon linearity");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "equation suite took {elapsed:?}");
    println!("criterion 1 (equation unit suite, {elapsed:?}): PASS");
}

// ---------------------------------------------------------------------
// Shared sweep: 4 families x small/medium x 5 range profiles x 10 seeds
// = 400 instances, each scheduled by greedy, the GA and fair-share, with
// the lower bound alongside.
// ---------------------------------------------------------------------

struct Instance {
    family: Family,
    size: usize,
    profile: usize,
    seed: u64,
    workflow: StreamWorkflow,
    topo: Topology,
    env: MulticloudEnv,
    bound: f64,
    greedy: Schedule,
    greedy_cost: f64,
    ga: Schedule,
    ga_cost: f64,
    ga_log: Vec<f64>,
    fair: Schedule,
    fair_cost: f64,
}

struct Sweep {
    instances: Vec<Instance>,
    build_time_s: f64,
}

fn profiles() -> [ParameterRanges; 5] {
    let base = ParameterRanges::default;
    [
        base(),
        ParameterRanges { source_rate: RangeLevel::Low, ..base() },
        ParameterRanges { processing_requirement: RangeLevel::High, ..base() },
        ParameterRanges { movable_share: RangeLevel::Low, ..base() },
        ParameterRanges { unit_rate: RangeLevel::High, ..base() },
    ]
}

const HORIZON: f64 = 180.0;

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        use rayon::prelude::*;
        let started = Instant::now();
        let net_ranges = NetworkRanges::default();
        let mut cells = Vec::new();
        for family in Family::ALL {
            for size_class in [SizeClass::Small, SizeClass::Medium] {
                for (profile, ranges) in profiles().into_iter().enumerate() {
                    for seed in 0..10u64 {
                        cells.push((family, family.size_of(size_class), profile, ranges.clone(), seed));
                    }
                }
            }
        }
        assert!(cells.len() >= 400);

        let instances: Vec<Instance> = cells
            .into_par_iter()
            .map(|(family, size, profile, ranges, seed)| {
                let workflow = generate_workflow(family, size, &ranges, seed).unwrap();
                let topo = Topology::build(&workflow).unwrap();
                let env = reference_environment(&net_ranges, seed).unwrap();
                let bound = lower_bound_cost(&workflow, &topo, &env, &net_ranges, HORIZON).unwrap();

                let greedy = greedy_schedule(&workflow, &topo, &env).unwrap();
                let greedy_cost = objective(&workflow, &topo, &greedy, &env, HORIZON).unwrap();

                let config = GaConfig {
                    population_size: 10,
                    generation_limit: 5,
                    seed: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(profile as u64),
                    ..GaConfig::default()
                };
                let result = ga_schedule(&workflow, &topo, &env, &config).unwrap();
                let ga_log = result.generations.iter().map(|g| g.best).collect();
                let ga_cost = result.fitness;

                let reference = default_reference_offer(&env).clone();
                let fair = fair_share_schedule(&workflow, &topo, &env, &reference).unwrap();
                let fair_cost = objective(&workflow, &topo, &fair, &env, HORIZON).unwrap();

                Instance {
                    family,
                    size,
                    profile,
                    seed,
                    workflow,
                    topo,
                    env,
                    bound,
                    greedy,
                    greedy_cost,
                    ga: result.schedule,
                    ga_cost,
                    ga_log,
                    fair,
                    fair_cost,
                }
            })
            .collect();
        Sweep { instances, build_time_s: started.elapsed().as_secs_f64() }
    })
}

// ---------------------------------------------------------------------
// Criterion 2: every produced schedule satisfies every constraint.
// ---------------------------------------------------------------------

#[test]
fn criterion_2_constraint_soundness() {
    let sweep = sweep();
    assert!(sweep.instances.len() >= 400, "need at least 400 instances");
    let mut checked = 0;
    for instance in &sweep.instances {
        for (name, schedule) in [
            ("greedy", &instance.greedy),
            ("ga", &instance.ga),
            ("fair_share", &instance.fair),
        ] {
            let report = check_constraints(&instance.workflow, &instance.topo, schedule, &instance.env);
            assert!(
                report.is_clean(),
                "{name} violates constraints on {} {} profile {} seed {}: {:?}",
                instance.family,
                instance.size,
                instance.profile,
                instance.seed,
                report.violations
            );
            checked += 1;
        }
    }
    assert!(
        sweep.build_time_s < 120.0,
        "sweep took {:.1}s, budget is 120s",
        sweep.build_time_s
    );
    println!(
        "criterion 2 (constraint soundness, {} schedules over {} instances, sweep {:.1}s): PASS",
        checked,
        sweep.instances.len(),
        sweep.build_time_s
    );
}

// ---------------------------------------------------------------------
// Criterion 3: lower bound <= GA <= greedy on every instance; fair-share
// compared at the median level per cell.
// ---------------------------------------------------------------------

#[test]
fn criterion_3_cost_ordering() {
    let sweep = sweep();
    for instance in &sweep.instances {
        assert!(
            leq(instance.bound, instance.ga_cost),
            "lower bound {} above GA {} on {} {} seed {}",
            instance.bound,
            instance.ga_cost,
            instance.family,
            instance.size,
            instance.seed
        );
        assert!(
            leq(instance.ga_cost, instance.greedy_cost),
            "GA {} above greedy {} on {} {} seed {}",
            instance.ga_cost,
            instance.greedy_cost,
            instance.family,
            instance.size,
            instance.seed
        );
    }
    println!(
        "criterion 3 (cost ordering lower_bound <= GA <= greedy, {} instances, zero violations): PASS",
        sweep.instances.len()
    );
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

#[test]
fn criterion_3_fair_share_median() {
    let sweep = sweep();
    let mut cells: std::collections::BTreeMap<(String, usize, usize), (Vec<f64>, Vec<f64>)> =
        std::collections::BTreeMap::new();
    for instance in &sweep.instances {
        let entry = cells
            .entry((instance.family.to_string(), instance.size, instance.profile))
            .or_default();
        entry.0.push(instance.greedy_cost);
        entry.1.push(instance.fair_cost);
    }
    let mut failures = Vec::new();
    for ((family, size, profile), (greedy_costs, fair_costs)) in &cells {
        let greedy_median = median(greedy_costs.clone());
        let fair_median = median(fair_costs.clone());
        if !leq(greedy_median, fair_median) {
            failures.push(format!(
                "{family} {size} profile {profile}: median greedy {greedy_median:.1} > median fair_share {fair_median:.1}"
            ));
        }
    }
    if failures.is_empty() {
        println!("criterion 3 (median greedy <= median fair-share per cell): PASS");
    } else {
        println!("criterion 3 (median greedy <= median fair-share per cell): FAIL");
    }
    assert!(
        failures.is_empty(),
        "median greedy exceeds median fair-share in {}/{} cells. The greedy \
         selection value (uncapped achieved-portions per cent, as published) \
         always buys the largest price-efficient VM, and the provisioned-capacity \
         propagation then inflates every descendant's requirement, so greedy \
         over-provisions structurally while fair-share pays one median-sized VM \
         type. First cells:\n{}",
        failures.len(),
        cells.len(),
        failures[..failures.len().min(5)].join("\n")
    );
}

// ---------------------------------------------------------------------
// Criterion 4: the GA attains the brute-force optimum on enumerable
// two-service instances.
// ---------------------------------------------------------------------

/// The enumerable instance: two services on two clouds with three offers
/// each, sized so one or two VMs per service always suffice.
fn enumerable_instance() -> (StreamWorkflow, Topology, MulticloudEnv) {
    let wf = StreamWorkflow {
        services: vec![service("up", 1000.0, 2.0, 0.4), service("down", 1000.0, 0.0, 1.0)],
        edges: vec![edge("up", "down", 1.0)],
        unit_dp_rate: 1.0,
    };
    let topo = Topology::build(&wf).unwrap();
    let clouds = vec![
        vec![
            OfferSpec::new("small0", 2000.0, 0.002, 1.0),
            OfferSpec::new("mid0", 6000.0, 0.0058, 1.0),
            OfferSpec::new("big0", 12000.0, 0.011, 1.0),
        ],
        vec![
            OfferSpec::new("small1", 2500.0, 0.0024, 1.0),
            OfferSpec::new("mid1", 7000.0, 0.0068, 1.0),
            OfferSpec::new("big1", 13000.0, 0.0125, 1.0),
        ],
    ];
    let network = NetworkMatrices {
        latency: vec![vec![0.0005, 0.02], vec![0.02, 0.0005]],
        bandwidth: vec![vec![800.0, 150.0], vec![150.0, 800.0]],
        transfer_cost: vec![vec![0.0, 0.015], vec![0.015, 0.0]],
    };
    (wf, topo, MulticloudEnv::new(clouds, network).unwrap())
}

/// Exhaustive oracle over per-service multisets of up to three offers from
/// one cloud, evaluated straight from the published formulas.
fn enumerate_optimum(wf: &StreamWorkflow, env: &MulticloudEnv) -> f64 {
    let lambda = wf.services[0].lambda;
    let gamma_up = wf.services[0].gamma;
    let share = wf.edges[0].share;
    let unit = wf.unit_dp_rate;

    // Multisets of sizes 1..=3 over a cloud's offers, as (phi, price, cloud).
    let options = |service: usize| -> Vec<(f64, f64, usize)> {
        let chi = unit * wf.services[service].mi;
        let mut all = Vec::new();
        for cloud in 0..env.cloud_count() {
            let offers: Vec<(f64, f64)> = env
                .offers_in_cloud(cloud)
                .filter(|o| o.mips >= chi)
                .map(|o| ((o.mips / chi).floor() * chi / wf.services[service].mi, o.price))
                .collect();
            let k = offers.len();
            for i in 0..k {
                all.push((offers[i].0, offers[i].1, cloud));
                for j in i..k {
                    all.push((offers[i].0 + offers[j].0, offers[i].1 + offers[j].1, cloud));
                    for l in j..k {
                        all.push((
                            offers[i].0 + offers[j].0 + offers[l].0,
                            offers[i].1 + offers[j].1 + offers[l].1,
                            cloud,
                        ));
                    }
                }
            }
        }
        all
    };

    let mut best = f64::INFINITY;
    for &(phi_up, price_up, cloud_up) in &options(0) {
        if phi_up < lambda {
            continue;
        }
        let alpha_down = gamma_up * phi_up * share;
        let out_up = gamma_up * lambda;
        for &(phi_down, price_down, cloud_down) in &options(1) {
            if phi_down < alpha_down {
                continue;
            }
            let mut cost = HORIZON * (price_up + price_down);
            if cloud_up != cloud_down {
                let volume = out_up * share;
                let rho = volume / env.bandwidth(cloud_up, cloud_down)
                    + env.latency(cloud_up, cloud_down);
                let moved = if rho <= 1.0 { volume } else { volume / rho };
                cost += HORIZON * moved * env.transfer_cost(cloud_up, cloud_down);
            }
            best = best.min(cost);
        }
    }
    best
}

#[test]
fn criterion_4_ga_optimality_on_enumerable_instances() {
    let started = Instant::now();
    let (wf, topo, env) = enumerable_instance();
    let optimum = enumerate_optimum(&wf, &env);

    let mut hits = 0;
    for seed in 0..100u64 {
        let config = GaConfig { seed, ..GaConfig::default() };
        let result = ga_schedule(&wf, &topo, &env, &config).unwrap();
        assert!(
            result.fitness >= optimum * (1.0 - REL),
            "GA fitness {} below the exhaustive optimum {optimum} (seed {seed})",
            result.fitness
        );
        if result.fitness <= optimum * (1.0 + REL) {
            hits += 1;
        } else {
            assert!(
                result.fitness <= optimum * 1.05,
                "seed {seed}: GA fitness {} more than 5% above optimum {optimum}",
                result.fitness
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(hits >= 95, "GA hit the optimum in only {hits}/100 seeds");
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 4 took {elapsed:?}");
    println!("criterion 4 (GA optimality, {hits}/100 optimal, {elapsed:?}): PASS");
}

// ---------------------------------------------------------------------
// Criterion 5: best fitness per generation never increases.
// ---------------------------------------------------------------------

#[test]
fn criterion_5_ga_monotone_convergence() {
    let sweep = sweep();
    let mut runs = 0;
    for instance in &sweep.instances {
        for pair in instance.ga_log.windows(2) {
            assert!(
                pair[1] <= pair[0],
                "best fitness regressed from {} to {} on {} {} seed {}",
                pair[0],
                pair[1],
                instance.family,
                instance.size,
                instance.seed
            );
        }
        runs += 1;
    }

    // A full-size configuration as well.
    let (wf, topo, env) = enumerable_instance();
    for seed in [3u64, 11, 42] {
        let result = ga_schedule(&wf, &topo, &env, &GaConfig { seed, ..GaConfig::default() }).unwrap();
        for pair in result.generations.windows(2) {
            assert!(pair[1].best <= pair[0].best);
        }
        runs += 1;
    }
    println!("criterion 5 (GA monotone convergence, {runs} logged runs): PASS");
}

// ---------------------------------------------------------------------
// Criterion 6: the simulator reproduces the analytic steady flow and
// conserves mass exactly.
// ---------------------------------------------------------------------

#[test]
fn criterion_6_simulator_fixed_point() {
    let sweep = sweep();
    let config = SimulationConfig::default();
    let mut checked = 0;
    for instance in sweep.instances.iter().step_by(17) {
        let report = steady_state_check(
            &instance.workflow,
            &instance.topo,
            &instance.greedy,
            &instance.env,
            &config,
        )
        .unwrap();
        assert!(
            report.is_clean(),
            "throughput deviates from the analytic fixed point on {} {} seed {}: {:?}",
            instance.family,
            instance.size,
            instance.seed,
            report.flagged
        );

        let (_, trace) = simulate_traced(
            &instance.workflow,
            &instance.topo,
            &instance.greedy,
            &instance.env,
            &config,
        )
        .unwrap();
        for record in &trace {
            assert_eq!(
                record.dropped,
                record.arrivals - record.processed,
                "mass conservation violated at tick {} service {}",
                record.tick,
                record.service
            );
            assert!(record.processed <= record.arrivals);
        }
        checked += 1;
    }
    assert!(checked >= 20, "too few instances simulated: {checked}");
    println!("criterion 6 (simulator fixed point + mass conservation, {checked} schedules): PASS");
}

// ---------------------------------------------------------------------
// Criterion 7: sub-second average latency for intra-cloud schedules with
// slack capacity.
// ---------------------------------------------------------------------

#[test]
fn criterion_7_sub_second_latency() {
    // A single-cloud environment forces intra-cloud schedules; generated
    // loads are tiny against the provisioned capacity, which the greedy
    // requirement propagation over-provisions by construction.
    let gce = build_reference_environment();
    let offers: Vec<OfferSpec> = gce
        .offers_in_cloud(1)
        .map(|o| OfferSpec::new(&o.type_name, o.mips, o.price, o.memory_gb))
        .collect();
    let network = NetworkMatrices {
        latency: vec![vec![0.0007]],
        bandwidth: vec![vec![800.0]],
        transfer_cost: vec![vec![0.0]],
    };
    let env = MulticloudEnv::new(vec![offers], network).unwrap();
    let config = SimulationConfig::default();

    for family in Family::ALL {
        let size = family.supported_sizes()[0];
        for seed in 0..3u64 {
            let ranges = ParameterRanges { cloud_count: 1, ..ParameterRanges::default() };
            let mut workflow = generate_workflow(family, size, &ranges, seed).unwrap();
            for s in &mut workflow.services {
                s.movability = Movability::Movable;
            }
            let topo = Topology::build(&workflow).unwrap();
            let schedule = greedy_schedule(&workflow, &topo, &env).unwrap();
            assert!(schedule.assignments.iter().all(|a| a.cloud == 0), "schedule not intra-cloud");

            let metrics = simulate(&workflow, &topo, &schedule, &env, &config).unwrap();
            assert!(
                metrics.avg_latency_s < 1.0,
                "{family} {size} seed {seed}: average latency {} s",
                metrics.avg_latency_s
            );
        }
    }

    // Depth-one sanity anchor: a single non-saturated service.
    let wf = StreamWorkflow {
        services: vec![service("solo", 1000.0, 5.0, 1.0)],
        edges: vec![],
        unit_dp_rate: 1.0,
    };
    let topo = Topology::build(&wf).unwrap();
    let schedule = greedy_schedule(&wf, &topo, &env).unwrap();
    let metrics = simulate(&wf, &topo, &schedule, &env, &config).unwrap();
    assert!(metrics.avg_latency_s < 1.0);
    println!("criterion 7 (sub-second intra-cloud latency): PASS");
}

// ---------------------------------------------------------------------
// Criterion 8: computational-time shape.
// ---------------------------------------------------------------------

#[test]
fn criterion_8_computational_time_shape() {
    let net_ranges = NetworkRanges::default();
    let mut greedy_max = 0.0f64;
    let mut ga_max = 0.0f64;

    // Greedy on a 100-node workflow in under a second; the GA at the
    // published 50/50 configuration in under a minute.
    for family in [Family::Montage, Family::CyberShake] {
        let workflow = generate_workflow(family, 100, &ParameterRanges::default(), 1).unwrap();
        let topo = Topology::build(&workflow).unwrap();
        let env = reference_environment(&net_ranges, 1).unwrap();

        let started = Instant::now();
        let _ = greedy_schedule(&workflow, &topo, &env).unwrap();
        let greedy_time = started.elapsed().as_secs_f64();
        greedy_max = greedy_max.max(greedy_time);
        assert!(greedy_time < 1.0, "greedy took {greedy_time:.3}s on a 100-node workflow");

        let started = Instant::now();
        let _ = ga_schedule(&workflow, &topo, &env, &GaConfig { seed: 1, ..GaConfig::default() }).unwrap();
        let ga_time = started.elapsed().as_secs_f64();
        ga_max = ga_max.max(ga_time);
        assert!(ga_time < 60.0, "GA took {ga_time:.1}s on a 100-node workflow");
        assert!(greedy_time < ga_time, "greedy ({greedy_time}s) not faster than GA ({ga_time}s)");
    }

    // Greedy faster than the GA on every instance of a small grid.
    for family in Family::ALL {
        for seed in 0..2u64 {
            let size = family.supported_sizes()[0];
            let workflow = generate_workflow(family, size, &ParameterRanges::default(), seed).unwrap();
            let topo = Topology::build(&workflow).unwrap();
            let env = reference_environment(&net_ranges, seed).unwrap();

            let started = Instant::now();
            let _ = greedy_schedule(&workflow, &topo, &env).unwrap();
            let greedy_time = started.elapsed().as_secs_f64();

            let config = GaConfig { seed, ..GaConfig::default() };
            let started = Instant::now();
            let _ = ga_schedule(&workflow, &topo, &env, &config).unwrap();
            let ga_time = started.elapsed().as_secs_f64();
            assert!(
                greedy_time < ga_time,
                "{family} {size} seed {seed}: greedy {greedy_time}s vs GA {ga_time}s"
            );
        }
    }
    println!(
        "criterion 8 (timing shape, greedy max {:.1}ms, GA max {:.1}s): PASS",
        greedy_max * 1e3,
        ga_max
    );
}

// ---------------------------------------------------------------------
// Criterion 9: fixed seeds reproduce byte-identical experiment CSVs.
// ---------------------------------------------------------------------

#[test]
fn criterion_9_experiment_determinism() {
    let spec = ScenarioSpec {
        scenario: 4,
        level: RangeLevel::Low,
        families: vec![Family::Epigenomics, Family::CyberShake],
        sizes: vec![SizeClass::Small],
        seeds: vec![1, 2],
        ga: GaConfig { population_size: 10, generation_limit: 5, ..GaConfig::default() },
        ga_runs: 2,
        fair_share_reference: None,
    };
    let mut first = Vec::new();
    write_results_csv(&run_scenario(&spec).unwrap(), &mut first).unwrap();
    let mut second = Vec::new();
    write_results_csv(&run_scenario(&spec).unwrap(), &mut second).unwrap();
    assert_eq!(first, second, "experiment CSVs differ between identical runs");
    assert!(!first.is_empty());
    println!(
        "criterion 9 (byte-identical CSVs across runs, {} bytes): PASS",
        first.len()
    );
}

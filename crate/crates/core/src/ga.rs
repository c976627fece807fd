//! Genetic resource scheduling over per-service VM selections.
//!
//! A candidate solution carries one chromosome per service: an ordered list
//! of global VM identifiers, all from the candidate's assigned cloud for
//! that service. The population is seeded with the greedy solution plus
//! random feasible candidates and evolves through elitism, roulette-wheel
//! selection, whole-chromosome two-point crossover, price-lowering mutation
//! and replacement of weak candidates. Fitness is the scheduling objective
//! (provisioning plus transfer cost), so lower is better.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::MulticloudEnv;
use crate::cost::{objective, unit_mips, CostError, Schedule, ServiceAssignment};
use crate::greedy::{greedy_schedule, GreedyError};
use crate::meets;
use crate::workflow::{Movability, StreamWorkflow, Topology};

/// Genetic algorithm parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generation_limit: usize,
    /// Number of best candidates copied unchanged into each generation.
    pub elitism_count: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_replacement: f64,
    /// Costing horizon in seconds.
    pub horizon: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generation_limit: 50,
            elitism_count: 1,
            p_crossover: 0.8,
            p_mutation: 0.3,
            p_replacement: 0.2,
            horizon: 180.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size < 2 {
            return Err(GaError::InvalidConfig("population_size must be at least 2"));
        }
        if self.elitism_count >= self.population_size {
            return Err(GaError::InvalidConfig("elitism_count must be below population_size"));
        }
        for p in [self.p_crossover, self.p_mutation, self.p_replacement] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GaError::InvalidConfig(
                    "crossover, mutation and replacement probabilities must be within [0, 1]",
                ));
            }
        }
        if !(self.horizon >= 0.0) {
            return Err(GaError::InvalidConfig("horizon must be non-negative"));
        }
        Ok(())
    }
}

/// Genetic scheduling failures.
#[derive(Debug, Clone, PartialEq)]
pub enum GaError {
    InvalidConfig(&'static str),
    /// The instance is infeasible; the greedy seed could not be built.
    Infeasible(GreedyError),
    /// No VM in a service's admissible clouds can process one minimum unit.
    NoFeasibleOffer { service: String },
    Cost(CostError),
}

impl fmt::Display for GaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            GaError::Infeasible(e) => write!(f, "instance is infeasible: {e}"),
            GaError::NoFeasibleOffer { service } => {
                write!(f, "no feasible VM offer for service {service:?}")
            }
            GaError::Cost(e) => write!(f, "cost evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for GaError {}

impl From<GreedyError> for GaError {
    fn from(e: GreedyError) -> Self {
        GaError::Infeasible(e)
    }
}

impl From<CostError> for GaError {
    fn from(e: CostError) -> Self {
        GaError::Cost(e)
    }
}

/// Resource selection for one service inside a candidate: the assigned
/// cloud and the genes (global VM ids, repetition allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    pub cloud: usize,
    pub genes: Vec<usize>,
}

/// One candidate solution with its cached fitness in cents.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub chromosomes: Vec<Chromosome>,
    pub fitness: f64,
}

impl Candidate {
    pub fn decode(&self) -> Schedule {
        Schedule {
            assignments: self
                .chromosomes
                .iter()
                .map(|c| ServiceAssignment { cloud: c.cloud, vms: c.genes.clone() })
                .collect(),
        }
    }

    fn from_schedule(schedule: &Schedule) -> Self {
        Candidate {
            chromosomes: schedule
                .assignments
                .iter()
                .map(|a| Chromosome { cloud: a.cloud, genes: a.vms.clone() })
                .collect(),
            fitness: f64::NAN,
        }
    }
}

/// Fitness of a candidate: the objective of its decoded schedule.
pub fn fitness(
    candidate: &Candidate,
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    horizon: f64,
) -> Result<f64, CostError> {
    objective(workflow, topo, &candidate.decode(), env, horizon)
}

/// Best/mean/worst fitness after one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
}

/// Outcome of a genetic scheduling run.
#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub schedule: Schedule,
    pub fitness: f64,
    /// One entry per generation, starting with the initial population.
    pub generations: Vec<GenerationStats>,
    /// Random initial candidates that fell back to duplicating the greedy
    /// seed.
    pub random_fallbacks: usize,
}

/// Draws a random feasible candidate.
///
/// Clouds are drawn uniformly among those with at least one feasible offer
/// (unmovable services keep their placement cloud); VMs are drawn uniformly
/// from the cloud's feasible offers and appended until the service's
/// required rate is covered. Every service receives at least one VM.
pub fn random_candidate(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    rng: &mut ChaCha8Rng,
) -> Result<Candidate, GaError> {
    let n = workflow.services.len();
    let mut chromosomes: Vec<Option<Chromosome>> = alloc::vec![None; n];
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

        let admissible: Vec<usize> = match service.movability {
            Movability::Unmovable { cloud } => alloc::vec![cloud],
            Movability::Movable => (0..env.cloud_count()).collect(),
        };
        let feasible_clouds: Vec<usize> = admissible
            .into_iter()
            .filter(|&c| env.offers_in_cloud(c).any(|o| o.mips >= chi))
            .collect();
        if feasible_clouds.is_empty() {
            return Err(GaError::NoFeasibleOffer { service: service.id.clone() });
        }
        let cloud = feasible_clouds[rng.random_range(0..feasible_clouds.len())];
        let offers: Vec<(usize, f64)> = env
            .offers_in_cloud(cloud)
            .filter(|o| o.mips >= chi)
            .map(|o| (o.global_id, libm::floor(o.mips / chi) * chi / service.mi))
            .collect();

        let mut genes = Vec::new();
        let mut phi = 0.0;
        while genes.is_empty() || !meets(phi, alpha) {
            let (gene, rate) = offers[rng.random_range(0..offers.len())];
            genes.push(gene);
            phi += rate;
        }
        aggregate_phi[s] = phi;
        chromosomes[s] = Some(Chromosome { cloud, genes });
    }

    Ok(Candidate {
        chromosomes: chromosomes.into_iter().map(|c| c.expect("all services assigned")).collect(),
        fitness: f64::NAN,
    })
}

/// Builds the initial population: the greedy solution first, then random
/// feasible candidates. Returns the population and the number of random
/// draws that fell back to duplicating the greedy seed.
pub fn initial_population(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    config: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Candidate>, usize), GaError> {
    config.validate()?;
    let seed_schedule = greedy_schedule(workflow, topo, env)?;
    let seed = Candidate::from_schedule(&seed_schedule);

    let mut population = Vec::with_capacity(config.population_size);
    let mut fallbacks = 0;
    population.push(seed.clone());
    while population.len() < config.population_size {
        let candidate = random_with_retries(workflow, topo, env, rng).unwrap_or_else(|| {
            fallbacks += 1;
            seed.clone()
        });
        population.push(candidate);
    }
    Ok((population, fallbacks))
}

const RANDOM_RETRIES: usize = 8;

fn random_with_retries(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    rng: &mut ChaCha8Rng,
) -> Option<Candidate> {
    for _ in 0..RANDOM_RETRIES {
        if let Ok(candidate) = random_candidate(workflow, topo, env, rng) {
            return Some(candidate);
        }
    }
    None
}

/// Roulette-wheel selection of two parent indices.
///
/// Fitness is a cost, so selection weight is `max_fitness - fitness + eps`;
/// a population of identical fitness degenerates to uniform selection. The
/// elite candidates are preserved separately and are still selectable here.
pub fn select_parents(population: &[Candidate], rng: &mut ChaCha8Rng) -> (usize, usize) {
    let max = population.iter().map(|c| c.fitness).fold(f64::MIN, f64::max);
    let eps = 1e-9 * libm::fabs(max);
    let weights: Vec<f64> = population.iter().map(|c| max - c.fitness + eps).collect();
    let total: f64 = weights.iter().sum();
    let mut draw = || -> usize {
        if !(total > 0.0) {
            return rng.random_range(0..population.len());
        }
        let target = rng.random_range(0.0..total);
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        population.len() - 1
    };
    (draw(), draw())
}

/// Two-point crossover at explicit cut indices: chromosomes in `[i, j)` are
/// swapped between the parents.
pub fn crossover_at(a: &Candidate, b: &Candidate, i: usize, j: usize) -> (Candidate, Candidate) {
    let mut child_a = a.clone();
    let mut child_b = b.clone();
    for s in i..j {
        core::mem::swap(&mut child_a.chromosomes[s], &mut child_b.chromosomes[s]);
    }
    child_a.fitness = f64::NAN;
    child_b.fitness = f64::NAN;
    (child_a, child_b)
}

/// Two-point crossover over service positions with probability `p`;
/// otherwise the children are copies of the parents. Swapping whole
/// chromosomes preserves the one-cloud-per-service invariant, but children
/// may need a repair pass when upstream capacity changed.
pub fn crossover(
    a: &Candidate,
    b: &Candidate,
    rng: &mut ChaCha8Rng,
    p_crossover: f64,
) -> (Candidate, Candidate) {
    if !rng.random_bool(p_crossover.clamp(0.0, 1.0)) {
        return (a.clone(), b.clone());
    }
    let s = a.chromosomes.len();
    let i = rng.random_range(0..=s);
    let j = rng.random_range(i..=s);
    crossover_at(a, b, i, j)
}

/// Mutates each chromosome independently with probability `p_mutation` by
/// replacing one uniformly chosen gene with a different offer from the same
/// cloud that still covers one minimum unit, costs strictly less, and keeps
/// the service's aggregate rate above its required rate. Chromosomes with
/// no such replacement are left unchanged.
pub fn mutate(
    candidate: &mut Candidate,
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    rng: &mut ChaCha8Rng,
    p_mutation: f64,
) {
    let p = p_mutation.clamp(0.0, 1.0);
    for s in 0..candidate.chromosomes.len() {
        if !rng.random_bool(p) {
            continue;
        }
        let service = &workflow.services[s];
        let chi = unit_mips(service.mi, workflow.unit_dp_rate);
        let (phi, alpha) = service_rates(candidate, workflow, topo, env, s);

        let chromosome = &candidate.chromosomes[s];
        let gene_pos = rng.random_range(0..chromosome.genes.len());
        let current = env.offer(chromosome.genes[gene_pos]).expect("gene resolves");
        let current_rate = libm::floor(current.mips / chi) * chi / service.mi;

        let replacements: Vec<usize> = env
            .offers_in_cloud(chromosome.cloud)
            .filter(|o| {
                o.global_id != current.global_id
                    && o.mips >= chi
                    && o.price < current.price
                    && meets(phi - current_rate + libm::floor(o.mips / chi) * chi / service.mi, alpha)
            })
            .map(|o| o.global_id)
            .collect();
        if replacements.is_empty() {
            continue;
        }
        let replacement = replacements[rng.random_range(0..replacements.len())];
        candidate.chromosomes[s].genes[gene_pos] = replacement;
        candidate.fitness = f64::NAN;
    }
}

/// Aggregate provisioned rate and required rate of one service under the
/// candidate's current provisioning.
fn service_rates(
    candidate: &Candidate,
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    service: usize,
) -> (f64, f64) {
    let mut aggregate_phi = alloc::vec![0.0; workflow.services.len()];
    for &s in &topo.order {
        let spec = &workflow.services[s];
        let chi = unit_mips(spec.mi, workflow.unit_dp_rate);
        aggregate_phi[s] = candidate.chromosomes[s]
            .genes
            .iter()
            .map(|&g| {
                let offer = env.offer(g).expect("gene resolves");
                libm::floor(offer.mips / chi) * chi / spec.mi
            })
            .sum();
    }
    let spec = &workflow.services[service];
    let mut input = spec.lambda;
    for &x in &topo.in_edges[service] {
        let edge = topo.edges[x];
        input += workflow.services[edge.org].gamma * aggregate_phi[edge.org] * edge.share;
    }
    (aggregate_phi[service], spec.mu.unwrap_or(input))
}

/// Restores the throughput constraint in topological order by appending the
/// assigned cloud's cheapest feasible offer to deficient chromosomes.
/// Movable services whose cloud lost feasibility are redrawn onto a random
/// feasible cloud. Idempotent on valid candidates.
pub fn repair(
    candidate: &mut Candidate,
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    rng: &mut ChaCha8Rng,
) -> Result<(), GaError> {
    let n = workflow.services.len();
    let mut aggregate_phi = alloc::vec![0.0; n];
    let mut changed = false;

    for &s in &topo.order {
        let service = &workflow.services[s];
        let chi = unit_mips(service.mi, workflow.unit_dp_rate);
        let rate_of = |global_id: usize| -> f64 {
            let offer = env.offer(global_id).expect("gene resolves");
            if offer.mips < chi {
                0.0
            } else {
                libm::floor(offer.mips / chi) * chi / service.mi
            }
        };

        let mut input = service.lambda;
        for &x in &topo.in_edges[s] {
            let edge = topo.edges[x];
            input += workflow.services[edge.org].gamma * aggregate_phi[edge.org] * edge.share;
        }
        let alpha = service.mu.unwrap_or(input);

        let mut phi: f64 = candidate.chromosomes[s].genes.iter().map(|&g| rate_of(g)).sum();
        if !meets(phi, alpha) || candidate.chromosomes[s].genes.is_empty() {
            let cheapest = env
                .offers_in_cloud(candidate.chromosomes[s].cloud)
                .filter(|o| o.mips >= chi)
                .min_by(|a, b| a.price.total_cmp(&b.price).then(a.global_id.cmp(&b.global_id)))
                .map(|o| o.global_id);
            match cheapest {
                Some(gene) => {
                    while !meets(phi, alpha) || candidate.chromosomes[s].genes.is_empty() {
                        candidate.chromosomes[s].genes.push(gene);
                        phi += rate_of(gene);
                        changed = true;
                    }
                }
                None => {
                    // The assigned cloud cannot host this service at all;
                    // rebuild the chromosome the way random candidates do.
                    let rebuilt = rebuild_chromosome(workflow, env, s, alpha, rng)?;
                    phi = rebuilt.genes.iter().map(|&g| rate_of(g)).sum();
                    candidate.chromosomes[s] = rebuilt;
                    changed = true;
                }
            }
        }
        aggregate_phi[s] = phi;
    }
    if changed {
        candidate.fitness = f64::NAN;
    }
    Ok(())
}

fn rebuild_chromosome(
    workflow: &StreamWorkflow,
    env: &MulticloudEnv,
    service: usize,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Chromosome, GaError> {
    let spec = &workflow.services[service];
    let chi = unit_mips(spec.mi, workflow.unit_dp_rate);
    let admissible: Vec<usize> = match spec.movability {
        Movability::Unmovable { cloud } => alloc::vec![cloud],
        Movability::Movable => (0..env.cloud_count()).collect(),
    };
    let feasible: Vec<usize> = admissible
        .into_iter()
        .filter(|&c| env.offers_in_cloud(c).any(|o| o.mips >= chi))
        .collect();
    if feasible.is_empty() {
        return Err(GaError::NoFeasibleOffer { service: spec.id.clone() });
    }
    let cloud = feasible[rng.random_range(0..feasible.len())];
    let offers: Vec<(usize, f64)> = env
        .offers_in_cloud(cloud)
        .filter(|o| o.mips >= chi)
        .map(|o| (o.global_id, libm::floor(o.mips / chi) * chi / spec.mi))
        .collect();
    let mut genes = Vec::new();
    let mut phi = 0.0;
    while genes.is_empty() || !meets(phi, alpha) {
        let (gene, rate) = offers[rng.random_range(0..offers.len())];
        genes.push(gene);
        phi += rate;
    }
    Ok(Chromosome { cloud, genes })
}

/// Challenges every candidate whose fitness exceeds the population mean:
/// with probability `p_replacement` it faces up to two fresh random
/// candidates and is replaced by the first strictly better one.
pub fn replace_weak(
    population: &mut [Candidate],
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    config: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(), GaError> {
    let mean = population.iter().map(|c| c.fitness).sum::<f64>() / population.len() as f64;
    for i in 0..population.len() {
        if !(population[i].fitness > mean) {
            continue;
        }
        if !rng.random_bool(config.p_replacement.clamp(0.0, 1.0)) {
            continue;
        }
        for _ in 0..2 {
            let Some(mut challenger) = random_with_retries(workflow, topo, env, rng) else {
                break;
            };
            challenger.fitness = fitness(&challenger, workflow, topo, env, config.horizon)?;
            if challenger.fitness < population[i].fitness {
                population[i] = challenger;
                break;
            }
        }
    }
    Ok(())
}

/// Runs the genetic scheduler and returns the best schedule found.
pub fn ga_schedule(
    workflow: &StreamWorkflow,
    topo: &Topology,
    env: &MulticloudEnv,
    config: &GaConfig,
) -> Result<GaResult, GaError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let (mut population, random_fallbacks) =
        initial_population(workflow, topo, env, config, &mut rng)?;
    for candidate in &mut population {
        candidate.fitness = fitness(candidate, workflow, topo, env, config.horizon)?;
    }
    sort_by_fitness(&mut population);

    let mut generations = Vec::with_capacity(config.generation_limit + 1);
    generations.push(stats(0, &population));

    for generation in 1..=config.generation_limit {
        let elites: Vec<Candidate> = population[..config.elitism_count].to_vec();
        let target = config.population_size - config.elitism_count;
        let mut offspring = Vec::with_capacity(target);

        while offspring.len() < target {
            let (i, j) = select_parents(&population, &mut rng);
            let (mut a, mut b) = crossover(&population[i], &population[j], &mut rng, config.p_crossover);
            for child in [&mut a, &mut b] {
                repair(child, workflow, topo, env, &mut rng)?;
                mutate(child, workflow, topo, env, &mut rng, config.p_mutation);
                repair(child, workflow, topo, env, &mut rng)?;
                child.fitness = fitness(child, workflow, topo, env, config.horizon)?;
            }
            offspring.push(a);
            if offspring.len() < target {
                offspring.push(b);
            }
        }

        replace_weak(&mut offspring, workflow, topo, env, config, &mut rng)?;

        population = elites;
        population.extend(offspring);
        sort_by_fitness(&mut population);
        generations.push(stats(generation, &population));
    }

    let best = &population[0];
    Ok(GaResult {
        schedule: best.decode(),
        fitness: best.fitness,
        generations,
        random_fallbacks,
    })
}

fn sort_by_fitness(population: &mut [Candidate]) {
    population.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

fn stats(generation: usize, population: &[Candidate]) -> GenerationStats {
    let best = population.first().map(|c| c.fitness).unwrap_or(f64::NAN);
    let worst = population.last().map(|c| c.fitness).unwrap_or(f64::NAN);
    let mean = population.iter().map(|c| c.fitness).sum::<f64>() / population.len() as f64;
    GenerationStats { generation, best, mean, worst }
}

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use streamsched_cli::experiment::{
    run_scenario, summarize, write_results_csv, write_summary_csv, write_timings_csv,
    read_results_csv, read_timings_csv, ScenarioSpec,
};
use streamsched_cli::formats;
use streamsched_core::baselines::{default_reference_offer, fair_share_schedule};
use streamsched_core::cloud::{reference_environment, NetworkRanges};
use streamsched_core::cost::{check_constraints, objective, provisioning_cost, transfer_cost};
use streamsched_core::ga::{ga_schedule, GaConfig};
use streamsched_core::generator::{generate_workflow, Family, ParameterRanges, SizeClass};
use streamsched_core::greedy::greedy_schedule_traced;
use streamsched_core::sim::{simulate_traced, SimulationConfig};
use streamsched_core::workflow::Topology;
use streamsched_core::RangeLevel;

#[derive(Parser)]
#[command(
    name = "streamsched",
    about = "Schedule and simulate stream workflow applications on multicloud environments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic stream workflow and write it as JSON.
    Generate(GenerateArgs),
    /// Export a multicloud environment (reference clouds plus sampled
    /// network matrices) as JSON.
    Env(EnvArgs),
    /// Schedule a workflow onto an environment.
    Schedule(ScheduleArgs),
    /// Simulate a schedule and report throughput, drops, latency and cost.
    Simulate(SimulateArgs),
    /// Run one experimental scenario and write the comparison CSV.
    Experiment(ExperimentArgs),
    /// Aggregate a results CSV into per-cell summaries.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Workflow family: montage, inspiral, epigenomics or cybershake.
    #[arg(long)]
    family: Family,
    /// Node count (e.g. 25) or size class (small, medium, large).
    #[arg(long)]
    size: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// External source data rate range.
    #[arg(long, default_value = "medium")]
    source_rate: RangeLevel,
    /// Data processing requirement range.
    #[arg(long, default_value = "medium")]
    processing: RangeLevel,
    /// Output proportion range.
    #[arg(long, default_value = "medium")]
    output: RangeLevel,
    /// Movable services percentage range.
    #[arg(long, default_value = "medium")]
    movable: RangeLevel,
    /// Minimum stream unit rate range.
    #[arg(long, default_value = "medium")]
    unit: RangeLevel,
    /// Clouds available for unmovable placements.
    #[arg(long, default_value_t = 3)]
    clouds: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnvArgs {
    /// Network bandwidth and latency range.
    #[arg(long, default_value = "medium")]
    network: RangeLevel,
    /// Outbound transfer cost range.
    #[arg(long, default_value = "medium")]
    cost: RangeLevel,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    workflow: PathBuf,
    #[arg(long)]
    env: PathBuf,
    /// greedy, ga or fair-share.
    #[arg(long)]
    algo: String,
    /// Costing horizon in seconds.
    #[arg(long, default_value_t = 180.0)]
    horizon: f64,
    /// GA population size.
    #[arg(long, default_value_t = 50)]
    population: usize,
    /// GA generation limit.
    #[arg(long, default_value_t = 50)]
    generations: usize,
    #[arg(long, default_value_t = 1)]
    elitism: usize,
    #[arg(long, default_value_t = 0.8)]
    p_crossover: f64,
    #[arg(long, default_value_t = 0.3)]
    p_mutation: f64,
    #[arg(long, default_value_t = 0.2)]
    p_replacement: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Global id of the fair-share reference offer; median MIPS offer when
    /// omitted.
    #[arg(long)]
    fair_share_ref: Option<usize>,
    /// Dump the greedy per-service selection trace to stderr.
    #[arg(long)]
    trace: bool,
    /// Write the GA generation log (generation, best, mean, worst) as CSV.
    #[arg(long)]
    gen_log: Option<PathBuf>,
    /// Output path for the schedule JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    workflow: PathBuf,
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value_t = 180)]
    duration: u32,
    #[arg(long, default_value_t = 120)]
    warmup: u32,
    /// Write the per-tick per-service trace as CSV.
    #[arg(long)]
    tick_trace: Option<PathBuf>,
    /// Output path for the metrics JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Scenario 1 to 7 (varies P1 to P7 respectively).
    #[arg(long)]
    scenario: u8,
    /// Range of the variable parameter: low, medium or high.
    #[arg(long = "range", default_value = "medium")]
    level: RangeLevel,
    /// Comma-separated families; all four when omitted.
    #[arg(long)]
    families: Option<String>,
    /// Comma-separated size classes; small,medium when omitted (desk
    /// scale).
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated seeds; 1..=5 when omitted (desk scale).
    #[arg(long)]
    seeds: Option<String>,
    /// Run the published sweep: all sizes, seeds 1..=10.
    #[arg(long)]
    full: bool,
    /// Independent GA runs per instance.
    #[arg(long, default_value_t = 10)]
    ga_runs: usize,
    #[arg(long)]
    fair_share_ref: Option<usize>,
    /// Results CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional wall-clock timings CSV path.
    #[arg(long)]
    timings: Option<PathBuf>,
    /// Keep going (exit 0) even when cells are infeasible.
    #[arg(long)]
    allow_infeasible: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Results CSV produced by `experiment`.
    #[arg(long)]
    results: PathBuf,
    /// Timings CSV produced by `experiment`.
    #[arg(long)]
    timings: Option<PathBuf>,
    /// Summary CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Env(args) => env(args),
        Command::Schedule(args) => schedule(args),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Experiment(args) => experiment(args),
        Command::Compare(args) => compare(args),
    }
}

fn parse_size(family: Family, raw: &str) -> Result<usize> {
    if let Ok(nodes) = raw.parse::<usize>() {
        return Ok(nodes);
    }
    let class: SizeClass = raw
        .parse()
        .map_err(|e| anyhow::anyhow!("invalid size {raw:?}: {e}"))?;
    Ok(family.size_of(class))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let size = parse_size(args.family, &args.size)?;
    let ranges = ParameterRanges {
        source_rate: args.source_rate,
        processing_requirement: args.processing,
        output_proportion: args.output,
        movable_share: args.movable,
        unit_rate: args.unit,
        cloud_count: args.clouds,
    };
    let workflow = generate_workflow(args.family, size, &ranges, args.seed)?;
    let provenance = formats::ProvenanceDoc {
        family: args.family.to_string(),
        size,
        seed: args.seed,
        source_rate: args.source_rate.to_string(),
        processing_requirement: args.processing.to_string(),
        output_proportion: args.output.to_string(),
        movable_share: args.movable.to_string(),
        unit_rate: args.unit.to_string(),
    };
    let doc = formats::WorkflowDoc::from_workflow(&workflow, Some(provenance));
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&doc)?)
}

fn env(args: EnvArgs) -> Result<()> {
    let ranges = NetworkRanges::from_levels(args.network, args.cost);
    let environment = reference_environment(&ranges, args.seed)?;
    let doc = formats::EnvDoc::from_env(&environment);
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&doc)?)
}

fn schedule(args: ScheduleArgs) -> Result<()> {
    let workflow = formats::load_workflow(&args.workflow)?;
    let environment = formats::load_env(&args.env)?;
    let topo = Topology::build(&workflow)?;

    let schedule = match args.algo.as_str() {
        "greedy" => {
            let (schedule, trace) = greedy_schedule_traced(&workflow, &topo, &environment)?;
            if args.trace {
                for service in &trace.services {
                    eprintln!(
                        "{}: {} units, cloud {} at {:.6} cents/s",
                        service.service, service.required_units, service.chosen_cloud, service.chosen_price
                    );
                    for evaluation in &service.evaluated {
                        let picks: Vec<String> =
                            evaluation.steps.iter().map(|s| s.global_id.to_string()).collect();
                        eprintln!(
                            "  cloud {}: [{}] at {:.6} cents/s",
                            evaluation.cloud,
                            picks.join(", "),
                            evaluation.bundle_price
                        );
                    }
                }
            }
            schedule
        }
        "ga" => {
            let config = GaConfig {
                population_size: args.population,
                generation_limit: args.generations,
                elitism_count: args.elitism,
                p_crossover: args.p_crossover,
                p_mutation: args.p_mutation,
                p_replacement: args.p_replacement,
                horizon: args.horizon,
                seed: args.seed,
            };
            let result = ga_schedule(&workflow, &topo, &environment, &config)?;
            if let Some(path) = &args.gen_log {
                let mut writer = csv::Writer::from_writer(File::create(path)?);
                writer.write_record(["generation", "best", "mean", "worst"])?;
                for stats in &result.generations {
                    writer.write_record([
                        stats.generation.to_string(),
                        format!("{:.9}", stats.best),
                        format!("{:.9}", stats.mean),
                        format!("{:.9}", stats.worst),
                    ])?;
                }
                writer.flush()?;
            }
            result.schedule
        }
        "fair-share" | "fair_share" => {
            let reference = match args.fair_share_ref {
                Some(global_id) => environment
                    .offer(global_id)
                    .with_context(|| format!("environment has no offer with global id {global_id}"))?
                    .clone(),
                None => default_reference_offer(&environment).clone(),
            };
            fair_share_schedule(&workflow, &topo, &environment, &reference)?
        }
        other => bail!("unknown algorithm {other:?} (expected greedy, ga or fair-share)"),
    };

    let report = check_constraints(&workflow, &topo, &schedule, &environment);
    if !report.is_clean() {
        bail!("schedule violates constraints: {:?}", report.violations);
    }
    let provisioning = provisioning_cost(&schedule, &environment, args.horizon)?;
    let transfer = transfer_cost(&workflow, &topo, &schedule, &environment, args.horizon)?;
    let total = objective(&workflow, &topo, &schedule, &environment, args.horizon)?;
    eprintln!(
        "objective over {}s: {total:.6} cents ({provisioning:.6} provisioning + {transfer:.6} transfer)",
        args.horizon
    );

    let doc = formats::ScheduleDoc::from_schedule(&schedule, &workflow);
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&doc)?)
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let workflow = formats::load_workflow(&args.workflow)?;
    let environment = formats::load_env(&args.env)?;
    let schedule = formats::load_schedule(&args.schedule, &workflow)?;
    let topo = Topology::build(&workflow)?;
    let config = SimulationConfig { duration_s: args.duration, warmup_s: args.warmup };

    let (metrics, trace) = simulate_traced(&workflow, &topo, &schedule, &environment, &config)?;
    if let Some(path) = &args.tick_trace {
        let mut writer = csv::Writer::from_writer(File::create(path)?);
        writer.write_record(["tick", "service", "arrivals", "processed", "dropped", "latency"])?;
        for record in &trace {
            writer.write_record([
                record.tick.to_string(),
                workflow.services[record.service].id.clone(),
                format!("{:.9}", record.arrivals),
                format!("{:.9}", record.processed),
                format!("{:.9}", record.dropped),
                format!("{:.9}", record.latency),
            ])?;
        }
        writer.flush()?;
    }

    let doc = formats::MetricsDoc::from_metrics(&metrics, &workflow);
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&doc)?)
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("invalid {what} {s:?}: {e}")))
        .collect()
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut spec = if args.full {
        ScenarioSpec::full(args.scenario, args.level)
    } else {
        ScenarioSpec::desk(args.scenario, args.level)
    };
    if let Some(families) = &args.families {
        spec.families = parse_list(families, "family")?;
    }
    if let Some(sizes) = &args.sizes {
        spec.sizes = parse_list(sizes, "size class")?;
    }
    if let Some(seeds) = &args.seeds {
        spec.seeds = parse_list(seeds, "seed")?;
    }
    spec.ga_runs = args.ga_runs;
    spec.fair_share_reference = args.fair_share_ref;

    let rows = run_scenario(&spec)?;
    write_results_csv(&rows, File::create(&args.out)?)?;
    if let Some(path) = &args.timings {
        write_timings_csv(&rows, File::create(path)?)?;
    }

    let infeasible: Vec<&str> = rows.iter().filter(|r| !r.is_ok()).map(|r| r.status.as_str()).collect();
    eprintln!(
        "wrote {} rows to {} ({} infeasible)",
        rows.len(),
        args.out.display(),
        infeasible.len()
    );
    if !infeasible.is_empty() && !args.allow_infeasible {
        bail!("{} infeasible cells (first: {})", infeasible.len(), infeasible[0]);
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let mut rows = read_results_csv(File::open(&args.results)?)?;
    if let Some(path) = &args.timings {
        read_timings_csv(File::open(path)?, &mut rows)?;
    }
    let summary = summarize(&rows);
    let mut buffer = Vec::new();
    write_summary_csv(&summary, &mut buffer)?;
    match args.out {
        Some(path) => std::fs::write(&path, &buffer).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&buffer)?,
    }
    Ok(())
}

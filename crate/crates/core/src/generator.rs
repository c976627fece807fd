//! Synthetic stream workflow generation.
//!
//! Each family reproduces the characteristic layer pattern of a well-known
//! scientific workflow structure at the published node counts. Topology is
//! a pure function of `(family, size)`; service parameters are drawn from
//! the published ranges with a seeded generator, so generation is fully
//! deterministic per `(family, size, ranges, seed)`.
//!
//! Draw order per workflow: the minimum unit rate first, then every
//! service's processing requirement, then every output proportion, then the
//! external rate of each source, then the movable fraction with the movable
//! subset, and finally one placement cloud per unmovable service.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ranges::{self, RangeLevel};
use crate::workflow::{EdgeSpec, Movability, ServiceSpec, StreamWorkflow};

/// Workflow structure family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Wide projection layer, pairwise difference layer, aggregation chain,
    /// background layer and a final chain.
    Montage,
    /// Parallel three-stage pipelines merging into collectors.
    Inspiral,
    /// Parallel chains of equal depth with a final merge chain.
    Epigenomics,
    /// Two-level fan-out into a wide synthesis layer, fanned into two
    /// collectors.
    CyberShake,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::Montage, Family::Inspiral, Family::Epigenomics, Family::CyberShake];

    /// Published node counts for small, medium and large instances.
    pub fn supported_sizes(&self) -> [usize; 3] {
        match self {
            Family::Montage => [25, 50, 100],
            Family::Inspiral => [30, 50, 100],
            Family::Epigenomics => [24, 46, 100],
            Family::CyberShake => [30, 50, 100],
        }
    }

    pub fn size_of(&self, class: SizeClass) -> usize {
        self.supported_sizes()[class as usize]
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Montage => write!(f, "montage"),
            Family::Inspiral => write!(f, "inspiral"),
            Family::Epigenomics => write!(f, "epigenomics"),
            Family::CyberShake => write!(f, "cybershake"),
        }
    }
}

impl FromStr for Family {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "montage" => Ok(Family::Montage),
            "inspiral" => Ok(Family::Inspiral),
            "epigenomics" => Ok(Family::Epigenomics),
            "cybershake" => Ok(Family::CyberShake),
            _ => Err(UnknownFamily),
        }
    }
}

/// Error for unparsable [`Family`] names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownFamily;

impl fmt::Display for UnknownFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected one of: montage, inspiral, epigenomics, cybershake")
    }
}

impl core::error::Error for UnknownFamily {}

/// Size class of a workflow instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeClass {
    Small = 0,
    Medium = 1,
    Large = 2,
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeClass::Small => write!(f, "small"),
            SizeClass::Medium => write!(f, "medium"),
            SizeClass::Large => write!(f, "large"),
        }
    }
}

impl FromStr for SizeClass {
    type Err = UnknownSizeClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(SizeClass::Small),
            "medium" | "med" => Ok(SizeClass::Medium),
            "large" => Ok(SizeClass::Large),
            _ => Err(UnknownSizeClass),
        }
    }
}

/// Error for unparsable [`SizeClass`] names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownSizeClass;

impl fmt::Display for UnknownSizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected one of: small, medium, large")
    }
}

impl core::error::Error for UnknownSizeClass {}

/// Intensity selection for every sampled parameter of a workflow instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterRanges {
    /// External source data rate.
    pub source_rate: RangeLevel,
    /// Data processing requirement.
    pub processing_requirement: RangeLevel,
    /// Output data rate proportion.
    pub output_proportion: RangeLevel,
    /// Fraction of movable services.
    pub movable_share: RangeLevel,
    /// Data processing rate of the minimum stream unit.
    pub unit_rate: RangeLevel,
    /// Placement clouds for unmovable services are drawn from this many
    /// clouds.
    pub cloud_count: usize,
}

impl Default for ParameterRanges {
    fn default() -> Self {
        ParameterRanges {
            source_rate: RangeLevel::Medium,
            processing_requirement: RangeLevel::Medium,
            output_proportion: RangeLevel::Medium,
            movable_share: RangeLevel::Medium,
            unit_rate: RangeLevel::Medium,
            cloud_count: 3,
        }
    }
}

/// Generation failures.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerateError {
    UnsupportedSize { family: Family, size: usize },
    NoClouds,
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::UnsupportedSize { family, size } => {
                let sizes = family.supported_sizes();
                write!(
                    f,
                    "{family} does not come in {size} nodes (supported: {}, {}, {})",
                    sizes[0], sizes[1], sizes[2]
                )
            }
            GenerateError::NoClouds => write!(f, "cloud_count must be at least 1"),
        }
    }
}

impl core::error::Error for GenerateError {}

struct Structure {
    ids: Vec<String>,
    /// Edges as (org, dest) indices into `ids`.
    edges: Vec<(usize, usize)>,
}

impl Structure {
    fn new() -> Self {
        Structure { ids: Vec::new(), edges: Vec::new() }
    }

    fn node(&mut self, id: String) -> usize {
        self.ids.push(id);
        self.ids.len() - 1
    }

    fn link(&mut self, org: usize, dest: usize) {
        self.edges.push((org, dest));
    }
}

/// Generates a stream workflow of the requested family and node count.
/// Every edge uses replica mode (share 1.0); only in-degree-0 services
/// receive an external stream.
pub fn generate_workflow(
    family: Family,
    size: usize,
    ranges: &ParameterRanges,
    seed: u64,
) -> Result<StreamWorkflow, GenerateError> {
    if !family.supported_sizes().contains(&size) {
        return Err(GenerateError::UnsupportedSize { family, size });
    }
    if ranges.cloud_count == 0 {
        return Err(GenerateError::NoClouds);
    }

    let structure = match family {
        Family::Montage => montage(size),
        Family::Inspiral => inspiral(size),
        Family::Epigenomics => epigenomics(size),
        Family::CyberShake => cybershake(size),
    };
    debug_assert_eq!(structure.ids.len(), size);

    let n = structure.ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let unit_dp_rate = draw(&mut rng, ranges::unit_rate(ranges.unit_rate));
    let mi: Vec<f64> = (0..n)
        .map(|_| draw(&mut rng, ranges::processing_requirement(ranges.processing_requirement)))
        .collect();
    let gamma: Vec<f64> =
        (0..n).map(|_| draw(&mut rng, ranges::output_proportion(ranges.output_proportion))).collect();

    let mut is_source = alloc::vec![true; n];
    for &(_, dest) in &structure.edges {
        is_source[dest] = false;
    }
    let lambda: Vec<f64> = (0..n)
        .map(|i| {
            if is_source[i] {
                draw(&mut rng, ranges::external_source_rate(ranges.source_rate))
            } else {
                0.0
            }
        })
        .collect();

    let movable_fraction = draw(&mut rng, ranges::movable_fraction(ranges.movable_share));
    let movable_count = libm::round(movable_fraction * n as f64) as usize;
    let movable = pick_subset(&mut rng, n, movable_count.min(n));

    let services: Vec<ServiceSpec> = (0..n)
        .map(|i| {
            let movability = if movable[i] {
                Movability::Movable
            } else {
                Movability::Unmovable { cloud: rng.random_range(0..ranges.cloud_count) }
            };
            ServiceSpec {
                id: structure.ids[i].clone(),
                mi: mi[i],
                lambda: lambda[i],
                gamma: gamma[i],
                movability,
                mu: None,
            }
        })
        .collect();

    let edges: Vec<EdgeSpec> = structure
        .edges
        .iter()
        .map(|&(org, dest)| EdgeSpec {
            org: structure.ids[org].clone(),
            dest: structure.ids[dest].clone(),
            share: 1.0,
        })
        .collect();

    Ok(StreamWorkflow { services, edges, unit_dp_rate })
}

fn draw(rng: &mut ChaCha8Rng, (min, max): (f64, f64)) -> f64 {
    if min == max {
        return min;
    }
    rng.random_range(min..=max)
}

/// Marks `count` indices chosen uniformly without replacement, via a
/// partial Fisher-Yates shuffle.
fn pick_subset(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<bool> {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut picked = alloc::vec![false; n];
    for slot in 0..count {
        let j = rng.random_range(slot..n);
        indices.swap(slot, j);
        picked[indices[slot]] = true;
    }
    picked
}

/// Projection layer, pairwise difference layer, two-stage aggregation,
/// background layer joined back to the projections, and a final chain of
/// four.
fn montage(n: usize) -> Structure {
    let a = (n - 6) / 3;
    let b = n - 2 * a - 6;
    let mut s = Structure::new();

    let projects: Vec<usize> = (0..a).map(|i| s.node(format!("project_{i:03}"))).collect();
    let diffs: Vec<usize> = (0..b).map(|i| s.node(format!("diff_{i:03}"))).collect();
    let concat = s.node("concatfit".into());
    let bgmodel = s.node("bgmodel".into());
    let backgrounds: Vec<usize> = (0..a).map(|i| s.node(format!("background_{i:03}"))).collect();
    let imgtbl = s.node("imgtbl".into());
    let add = s.node("imgadd".into());
    let shrink = s.node("shrink".into());
    let jpeg = s.node("jpeg".into());

    for (j, &diff) in diffs.iter().enumerate() {
        s.link(projects[j % a], diff);
        s.link(projects[(j + 1) % a], diff);
    }
    for &diff in &diffs {
        s.link(diff, concat);
    }
    s.link(concat, bgmodel);
    for (i, &background) in backgrounds.iter().enumerate() {
        s.link(bgmodel, background);
        s.link(projects[i], background);
    }
    for &background in &backgrounds {
        s.link(background, imgtbl);
    }
    s.link(imgtbl, add);
    s.link(add, shrink);
    s.link(shrink, jpeg);
    s
}

/// Parallel template/match/trigger pipelines merged group-wise, then a
/// two-stage collector.
fn inspiral(n: usize) -> Structure {
    let mut p = (n - 2) / 3;
    let mut m = n - 2 - 3 * p;
    if m == 0 {
        p -= 1;
        m = 3;
    }
    let mut s = Structure::new();

    let templates: Vec<usize> = (0..p).map(|i| s.node(format!("tmpltbank_{i:03}"))).collect();
    let matches: Vec<usize> = (0..p).map(|i| s.node(format!("inspiral_{i:03}"))).collect();
    let triggers: Vec<usize> = (0..p).map(|i| s.node(format!("trigbank_{i:03}"))).collect();
    let thincas: Vec<usize> = (0..m).map(|i| s.node(format!("thinca_{i:03}"))).collect();
    let coinc = s.node("coinc".into());
    let report = s.node("report".into());

    for i in 0..p {
        s.link(templates[i], matches[i]);
        s.link(matches[i], triggers[i]);
        s.link(triggers[i], thincas[i * m / p]);
    }
    for &thinca in &thincas {
        s.link(thinca, coinc);
    }
    s.link(coinc, report);
    s
}

/// Parallel chains of depth five (the first few extended by one stage to
/// hit the exact node count) merged by a three-stage tail.
fn epigenomics(n: usize) -> Structure {
    let c = (n - 3) / 5;
    let r = (n - 3) - 5 * c;
    let mut s = Structure::new();

    let mut tails = Vec::with_capacity(c);
    for i in 0..c {
        let mut stages = alloc::vec!["fastq", "filter", "convert", "align"];
        if i < r {
            stages.push("dedup");
        }
        stages.push("map");
        let mut prev: Option<usize> = None;
        for stage in stages {
            let node = s.node(format!("{stage}_{i:03}"));
            if let Some(parent) = prev {
                s.link(parent, node);
            }
            prev = Some(node);
        }
        tails.push(prev.expect("chain is non-empty"));
    }
    let mapmerge = s.node("mapmerge".into());
    let index = s.node("maqindex".into());
    let pileup = s.node("pileup".into());
    for &tail in &tails {
        s.link(tail, mapmerge);
    }
    s.link(mapmerge, index);
    s.link(index, pileup);
    s
}

/// Extraction roots fanning out through a mesh layer into a wide synthesis
/// layer, collected by two zip sinks.
fn cybershake(n: usize) -> Structure {
    let roots = (n / 10).max(2);
    let mesh = n / 5;
    let wide = n - roots - mesh - 2;
    let mut s = Structure::new();

    let sgts: Vec<usize> = (0..roots).map(|i| s.node(format!("extractsgt_{i:03}"))).collect();
    let meshes: Vec<usize> = (0..mesh).map(|i| s.node(format!("mesh_{i:03}"))).collect();
    let synths: Vec<usize> = (0..wide).map(|i| s.node(format!("synth_{i:03}"))).collect();
    let zipseis = s.node("zipseis".into());
    let zippsa = s.node("zippsa".into());

    for (j, &mid) in meshes.iter().enumerate() {
        s.link(sgts[j % roots], mid);
    }
    for (k, &synth) in synths.iter().enumerate() {
        s.link(meshes[k % mesh], synth);
    }
    for &synth in &synths {
        s.link(synth, zipseis);
        s.link(synth, zippsa);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::Topology;

    #[test]
    fn montage_medium_ranges_bound_processing_requirement() {
        let ranges = ParameterRanges::default();
        let wf = generate_workflow(Family::Montage, 25, &ranges, 42).unwrap();
        assert_eq!(wf.services.len(), 25);
        for service in &wf.services {
            assert!(
                (1348.0..=2674.0).contains(&service.mi),
                "mi {} outside the medium range",
                service.mi
            );
        }
        assert!(wf.validate().is_ok());
    }

    #[test]
    fn cybershake_high_source_rates_stay_in_range() {
        let ranges = ParameterRanges { source_rate: RangeLevel::High, ..ParameterRanges::default() };
        let wf = generate_workflow(Family::CyberShake, 30, &ranges, 7).unwrap();
        assert_eq!(wf.services.len(), 30);
        let topo = Topology::build(&wf).unwrap();
        for (i, service) in wf.services.iter().enumerate() {
            if topo.in_edges[i].is_empty() {
                assert!(
                    (8.5..=12.5).contains(&service.lambda),
                    "lambda {} outside the high range",
                    service.lambda
                );
            } else {
                assert_eq!(service.lambda, 0.0);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let ranges = ParameterRanges::default();
        let a = generate_workflow(Family::Inspiral, 50, &ranges, 11).unwrap();
        let b = generate_workflow(Family::Inspiral, 50, &ranges, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_workflow(Family::Inspiral, 50, &ranges, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unsupported_sizes_are_rejected() {
        let ranges = ParameterRanges::default();
        match generate_workflow(Family::Montage, 30, &ranges, 0) {
            Err(GenerateError::UnsupportedSize { family: Family::Montage, size: 30 }) => {}
            other => panic!("expected UnsupportedSize, got {other:?}"),
        }
    }

    #[test]
    fn every_family_size_produces_exact_node_counts() {
        let ranges = ParameterRanges::default();
        for family in Family::ALL {
            for size in family.supported_sizes() {
                let wf = generate_workflow(family, size, &ranges, 1).unwrap();
                assert_eq!(wf.services.len(), size, "{family} {size}");
                assert!(wf.validate().is_ok(), "{family} {size}");
            }
        }
    }

    #[test]
    fn unmovable_services_get_placement_clouds_in_range() {
        let ranges =
            ParameterRanges { movable_share: RangeLevel::Low, ..ParameterRanges::default() };
        let wf = generate_workflow(Family::Epigenomics, 24, &ranges, 3).unwrap();
        let mut unmovable = 0;
        for service in &wf.services {
            if let Movability::Unmovable { cloud } = service.movability {
                assert!(cloud < 3);
                unmovable += 1;
            }
        }
        // The low range caps movable services at 34%.
        assert!(unmovable >= 24 - (0.34f64 * 24.0).round() as usize - 1);
    }
}

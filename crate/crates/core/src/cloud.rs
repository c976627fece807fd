//! Multicloud environment model: VM offers, global VM identifiers and the
//! inter-cloud latency / bandwidth / transfer-cost matrices.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ranges::{self, RangeLevel};

/// One VM configuration offered by a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct VmOffer {
    /// Identifier unique across all clouds of the environment.
    pub global_id: usize,
    pub cloud_id: usize,
    pub type_name: String,
    /// Total compute capacity in MIPS.
    pub mips: f64,
    /// Provisioning price in cents per second.
    pub price: f64,
    /// Memory in GB. Carried as metadata only; the model is MIPS-based.
    pub memory_gb: f64,
}

/// Offer description used when constructing an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferSpec {
    pub type_name: String,
    pub mips: f64,
    pub price: f64,
    pub memory_gb: f64,
}

impl OfferSpec {
    pub fn new(type_name: &str, mips: f64, price: f64, memory_gb: f64) -> Self {
        OfferSpec { type_name: String::from(type_name), mips, price, memory_gb }
    }
}

/// Square matrices describing the network between clouds. Entry `[i][j]`
/// describes the link carrying traffic from cloud `i` to cloud `j`; the
/// diagonal describes intra-cloud links.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMatrices {
    /// Latency in seconds.
    pub latency: Vec<Vec<f64>>,
    /// Bandwidth in MB/s.
    pub bandwidth: Vec<Vec<f64>>,
    /// Transfer cost in cents per MB; the diagonal is zero.
    pub transfer_cost: Vec<Vec<f64>>,
}

/// A multicloud environment: clouds with their VM offers plus the network
/// matrices between them. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticloudEnv {
    cloud_count: usize,
    offers: Vec<VmOffer>,
    by_cloud: Vec<Vec<usize>>,
    network: NetworkMatrices,
}

/// Environment construction and sampling errors.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvError {
    EmptyCloud { cloud: usize },
    NoClouds,
    NonPositiveMips { cloud: usize, type_name: String },
    NegativePrice { cloud: usize, type_name: String },
    BadMatrixShape { expected: usize },
    NonPositiveBandwidth { from: usize, to: usize },
    NegativeEntry { matrix: &'static str, from: usize, to: usize },
    NonZeroDiagonalTransferCost { cloud: usize },
    InvalidRange { name: &'static str, min: f64, max: f64 },
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::EmptyCloud { cloud } => write!(f, "cloud {cloud} offers no VM"),
            EnvError::NoClouds => write!(f, "environment must contain at least one cloud"),
            EnvError::NonPositiveMips { cloud, type_name } => {
                write!(f, "offer {type_name:?} of cloud {cloud}: mips must be > 0")
            }
            EnvError::NegativePrice { cloud, type_name } => {
                write!(f, "offer {type_name:?} of cloud {cloud}: price must be >= 0")
            }
            EnvError::BadMatrixShape { expected } => {
                write!(f, "network matrices must be {expected}x{expected}")
            }
            EnvError::NonPositiveBandwidth { from, to } => {
                write!(f, "bandwidth[{from}][{to}] must be > 0")
            }
            EnvError::NegativeEntry { matrix, from, to } => {
                write!(f, "{matrix}[{from}][{to}] must be >= 0")
            }
            EnvError::NonZeroDiagonalTransferCost { cloud } => {
                write!(f, "transfer_cost[{cloud}][{cloud}] must be 0 (intra-cloud transfer is free)")
            }
            EnvError::InvalidRange { name, min, max } => {
                write!(f, "invalid {name} range: min {min} > max {max}")
            }
        }
    }
}

impl core::error::Error for EnvError {}

impl MulticloudEnv {
    /// Builds an environment from per-cloud offer lists and network matrices.
    /// Global VM identifiers are assigned in row order starting at 0.
    pub fn new(clouds: Vec<Vec<OfferSpec>>, network: NetworkMatrices) -> Result<Self, EnvError> {
        let cloud_count = clouds.len();
        if cloud_count == 0 {
            return Err(EnvError::NoClouds);
        }
        let mut offers = Vec::new();
        let mut by_cloud = Vec::with_capacity(cloud_count);
        for (cloud_id, specs) in clouds.into_iter().enumerate() {
            if specs.is_empty() {
                return Err(EnvError::EmptyCloud { cloud: cloud_id });
            }
            let mut ids = Vec::with_capacity(specs.len());
            for spec in specs {
                if !(spec.mips > 0.0) {
                    return Err(EnvError::NonPositiveMips { cloud: cloud_id, type_name: spec.type_name });
                }
                if spec.price < 0.0 {
                    return Err(EnvError::NegativePrice { cloud: cloud_id, type_name: spec.type_name });
                }
                let global_id = offers.len();
                ids.push(global_id);
                offers.push(VmOffer {
                    global_id,
                    cloud_id,
                    type_name: spec.type_name,
                    mips: spec.mips,
                    price: spec.price,
                    memory_gb: spec.memory_gb,
                });
            }
            by_cloud.push(ids);
        }

        for matrix in [&network.latency, &network.bandwidth, &network.transfer_cost] {
            if matrix.len() != cloud_count || matrix.iter().any(|row| row.len() != cloud_count) {
                return Err(EnvError::BadMatrixShape { expected: cloud_count });
            }
        }
        for i in 0..cloud_count {
            for j in 0..cloud_count {
                if !(network.bandwidth[i][j] > 0.0) {
                    return Err(EnvError::NonPositiveBandwidth { from: i, to: j });
                }
                if network.latency[i][j] < 0.0 {
                    return Err(EnvError::NegativeEntry { matrix: "latency", from: i, to: j });
                }
                if network.transfer_cost[i][j] < 0.0 {
                    return Err(EnvError::NegativeEntry { matrix: "transfer_cost", from: i, to: j });
                }
            }
            if network.transfer_cost[i][i] != 0.0 {
                return Err(EnvError::NonZeroDiagonalTransferCost { cloud: i });
            }
        }

        Ok(MulticloudEnv { cloud_count, offers, by_cloud, network })
    }

    pub fn cloud_count(&self) -> usize {
        self.cloud_count
    }

    /// All offers in global id order.
    pub fn offers(&self) -> &[VmOffer] {
        &self.offers
    }

    pub fn offer(&self, global_id: usize) -> Option<&VmOffer> {
        self.offers.get(global_id)
    }

    pub fn offers_in_cloud(&self, cloud: usize) -> impl Iterator<Item = &VmOffer> + '_ {
        self.by_cloud
            .get(cloud)
            .into_iter()
            .flatten()
            .map(move |&id| &self.offers[id])
    }

    pub fn latency(&self, from: usize, to: usize) -> f64 {
        self.network.latency[from][to]
    }

    pub fn bandwidth(&self, from: usize, to: usize) -> f64 {
        self.network.bandwidth[from][to]
    }

    pub fn transfer_cost(&self, from: usize, to: usize) -> f64 {
        self.network.transfer_cost[from][to]
    }

    pub fn network(&self) -> &NetworkMatrices {
        &self.network
    }
}

/// Sampling ranges for the network matrices. Intra-cloud links draw from the
/// ingress ranges, inter-cloud links from the egress ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRanges {
    pub ingress_bandwidth: (f64, f64),
    pub ingress_latency: (f64, f64),
    pub egress_bandwidth: (f64, f64),
    pub egress_latency: (f64, f64),
    pub transfer_cost: (f64, f64),
}

impl NetworkRanges {
    /// Ranges for a published intensity: one level for bandwidth/latency and
    /// one for the outbound transfer cost.
    pub fn from_levels(network: RangeLevel, cost: RangeLevel) -> Self {
        NetworkRanges {
            ingress_bandwidth: ranges::ingress_bandwidth(network),
            ingress_latency: ranges::ingress_latency(network),
            egress_bandwidth: ranges::egress_bandwidth(network),
            egress_latency: ranges::egress_latency(network),
            transfer_cost: ranges::transfer_cost(cost),
        }
    }

    fn check(&self) -> Result<(), EnvError> {
        for (name, (min, max)) in [
            ("ingress bandwidth", self.ingress_bandwidth),
            ("ingress latency", self.ingress_latency),
            ("egress bandwidth", self.egress_bandwidth),
            ("egress latency", self.egress_latency),
            ("transfer cost", self.transfer_cost),
        ] {
            if min > max || min < 0.0 {
                return Err(EnvError::InvalidRange { name, min, max });
            }
        }
        Ok(())
    }
}

impl Default for NetworkRanges {
    fn default() -> Self {
        NetworkRanges::from_levels(RangeLevel::Medium, RangeLevel::Medium)
    }
}

/// Draws network matrices for `cloud_count` clouds. Each directed pair is
/// sampled independently, so the matrices need not be symmetric.
/// Deterministic for a fixed seed.
pub fn sample_network(
    ranges: &NetworkRanges,
    cloud_count: usize,
    seed: u64,
) -> Result<NetworkMatrices, EnvError> {
    ranges.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut latency = alloc::vec![alloc::vec![0.0; cloud_count]; cloud_count];
    let mut bandwidth = alloc::vec![alloc::vec![0.0; cloud_count]; cloud_count];
    let mut transfer = alloc::vec![alloc::vec![0.0; cloud_count]; cloud_count];
    for i in 0..cloud_count {
        for j in 0..cloud_count {
            if i == j {
                latency[i][j] = draw(&mut rng, ranges.ingress_latency);
                bandwidth[i][j] = draw(&mut rng, ranges.ingress_bandwidth);
                transfer[i][j] = 0.0;
            } else {
                latency[i][j] = draw(&mut rng, ranges.egress_latency);
                bandwidth[i][j] = draw(&mut rng, ranges.egress_bandwidth);
                transfer[i][j] = draw(&mut rng, ranges.transfer_cost);
            }
        }
    }
    Ok(NetworkMatrices { latency, bandwidth, transfer_cost: transfer })
}

fn draw(rng: &mut ChaCha8Rng, (min, max): (f64, f64)) -> f64 {
    if min == max {
        return min;
    }
    rng.random_range(min..=max)
}

/// The three modelled clouds with their published VM configurations.
///
/// Cloud 0 is EC2-like (11 offers), cloud 1 GCE-like (13 offers), cloud 2
/// Azure-like (16 offers). MIPS values derive from ECU-equivalent CPU
/// capacity; prices are cents per second.
pub fn reference_offers() -> Vec<Vec<OfferSpec>> {
    alloc::vec![
        alloc::vec![
            OfferSpec::new("m4.large", 7000.0, 0.0054, 8.0),
            OfferSpec::new("m4.xlarge", 13000.0, 0.0107, 16.0),
            OfferSpec::new("m4.2xlarge", 26000.0, 0.0214, 32.0),
            OfferSpec::new("m4.4xlarge", 54000.0, 0.0427, 64.0),
            OfferSpec::new("m4.10xlarge", 125000.0, 0.1067, 160.0),
            OfferSpec::new("m4.16xlarge", 188000.0, 0.1707, 256.0),
            OfferSpec::new("c4.large", 8000.0, 0.0054, 3.75),
            OfferSpec::new("c4.xlarge", 16000.0, 0.0107, 7.5),
            OfferSpec::new("c4.2xlarge", 31000.0, 0.0213, 15.0),
            OfferSpec::new("c4.4xlarge", 62000.0, 0.0426, 30.0),
            OfferSpec::new("c4.8xlarge", 132000.0, 0.0859, 60.0),
        ],
        alloc::vec![
            OfferSpec::new("n1-standard-1", 2750.0, 0.0014, 3.75),
            OfferSpec::new("n1-standard-2", 5500.0, 0.0027, 7.5),
            OfferSpec::new("n1-standard-4", 11000.0, 0.0053, 15.0),
            OfferSpec::new("n1-standard-8", 22000.0, 0.0106, 30.0),
            OfferSpec::new("n1-standard-16", 44000.0, 0.0212, 60.0),
            OfferSpec::new("n1-standard-32", 88000.0, 0.0423, 120.0),
            OfferSpec::new("n1-standard-64", 176000.0, 0.0845, 240.0),
            OfferSpec::new("n1-highcpu-2", 5500.0, 0.002, 1.8),
            OfferSpec::new("n1-highcpu-4", 11000.0, 0.004, 3.6),
            OfferSpec::new("n1-highcpu-8", 22000.0, 0.0079, 7.2),
            OfferSpec::new("n1-highcpu-16", 44000.0, 0.0158, 14.4),
            OfferSpec::new("n1-highcpu-32", 88000.0, 0.0316, 28.8),
            OfferSpec::new("n1-highcpu-64", 176000.0, 0.0631, 57.8),
        ],
        alloc::vec![
            OfferSpec::new("D1 v2", 2500.0, 0.0035, 3.58),
            OfferSpec::new("D2 v2", 5000.0, 0.0069, 7.0),
            OfferSpec::new("D3 v2", 10000.0, 0.0137, 14.0),
            OfferSpec::new("D4 v2", 20000.0, 0.0274, 28.0),
            OfferSpec::new("D5 v2", 40000.0, 0.052, 56.0),
            OfferSpec::new("D2 v3", 5000.0, 0.0054, 8.0),
            OfferSpec::new("D4 v3", 10000.0, 0.0107, 16.0),
            OfferSpec::new("D8 v3", 20000.0, 0.0214, 32.0),
            OfferSpec::new("D16 v3", 40000.0, 0.0427, 64.0),
            OfferSpec::new("D32 v3", 80000.0, 0.0854, 128.0),
            OfferSpec::new("D64 v3", 160000.0, 0.1707, 256.0),
            OfferSpec::new("F1", 2500.0, 0.0027, 2.0),
            OfferSpec::new("F2", 5000.0, 0.0054, 4.0),
            OfferSpec::new("F4", 10000.0, 0.0107, 8.0),
            OfferSpec::new("F8", 20000.0, 0.0213, 16.0),
            OfferSpec::new("F16", 40000.0, 0.0426, 32.0),
        ],
    ]
}

/// The reference environment with network matrices sampled from the given
/// ranges.
pub fn reference_environment(ranges: &NetworkRanges, seed: u64) -> Result<MulticloudEnv, EnvError> {
    let offers = reference_offers();
    let network = sample_network(ranges, offers.len(), seed)?;
    MulticloudEnv::new(offers, network)
}

/// The reference environment with medium network ranges and seed 0.
pub fn build_reference_environment() -> MulticloudEnv {
    reference_environment(&NetworkRanges::default(), 0).expect("reference environment is valid")
}

/// One row of the global VM mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct VmMappingRow {
    pub global_id: usize,
    pub local_id: usize,
    pub cloud_id: usize,
    pub mips: f64,
}

/// The bijection between global VM identifiers and per-cloud local
/// identifiers, in global id order.
pub fn global_vm_mapping(env: &MulticloudEnv) -> Vec<VmMappingRow> {
    let mut next_local = alloc::vec![0usize; env.cloud_count()];
    env.offers()
        .iter()
        .map(|offer| {
            let local_id = next_local[offer.cloud_id];
            next_local[offer.cloud_id] += 1;
            VmMappingRow {
                global_id: offer.global_id,
                local_id,
                cloud_id: offer.cloud_id,
                mips: offer.mips,
            }
        })
        .collect()
}

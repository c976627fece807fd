//! Published parameter ranges for workflow and environment generation.
//!
//! Every range comes in three intensities. Values are `(min, max)` pairs and
//! sampling is continuous uniform over the closed interval.

use core::fmt;
use core::str::FromStr;

/// Intensity of a parameter range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RangeLevel {
    Low,
    #[default]
    Medium,
    High,
}

impl fmt::Display for RangeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangeLevel::Low => write!(f, "low"),
            RangeLevel::Medium => write!(f, "medium"),
            RangeLevel::High => write!(f, "high"),
        }
    }
}

impl FromStr for RangeLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(RangeLevel::Low),
            "medium" | "med" => Ok(RangeLevel::Medium),
            "high" => Ok(RangeLevel::High),
            _ => Err(UnknownLevel),
        }
    }
}

/// Error for unparsable [`RangeLevel`] names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownLevel;

impl fmt::Display for UnknownLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected one of: low, medium, high")
    }
}

impl core::error::Error for UnknownLevel {}

/// External source data rate in MB/s.
pub fn external_source_rate(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.0013, 4.2),
        RangeLevel::Medium => (4.3, 8.4),
        RangeLevel::High => (8.5, 12.5),
    }
}

/// Service data processing requirement in MI per MB.
pub fn processing_requirement(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (20.0, 1347.0),
        RangeLevel::Medium => (1348.0, 2674.0),
        RangeLevel::High => (2675.0, 4000.0),
    }
}

/// Proportion of output data to input data (dimensionless).
pub fn output_proportion(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.01, 0.50),
        RangeLevel::Medium => (0.51, 1.0),
        RangeLevel::High => (1.01, 1.5),
    }
}

/// Fraction of movable services, as a proportion in [0, 1].
pub fn movable_fraction(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.0, 0.34),
        RangeLevel::Medium => (0.35, 0.68),
        RangeLevel::High => (0.69, 1.0),
    }
}

/// Data processing rate of the minimum stream unit in MB/s.
pub fn unit_rate(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.2, 1.0),
        RangeLevel::Medium => (1.1, 2.0),
        RangeLevel::High => (2.1, 2.9),
    }
}

/// Intra-cloud network bandwidth in MB/s.
pub fn ingress_bandwidth(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (302.0, 614.0),
        RangeLevel::Medium => (615.0, 926.0),
        RangeLevel::High => (927.0, 1238.0),
    }
}

/// Intra-cloud network latency in seconds.
pub fn ingress_latency(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.0004, 0.00063),
        RangeLevel::Medium => (0.00064, 0.00086),
        RangeLevel::High => (0.00087, 0.0011),
    }
}

/// Inter-cloud network bandwidth in MB/s.
pub fn egress_bandwidth(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (24.0, 121.0),
        RangeLevel::Medium => (122.0, 218.0),
        RangeLevel::High => (219.0, 314.0),
    }
}

/// Inter-cloud network latency in seconds.
pub fn egress_latency(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.009, 0.020),
        RangeLevel::Medium => (0.021, 0.031),
        RangeLevel::High => (0.032, 0.040),
    }
}

/// Outbound data transfer cost in cents per MB. Inbound transfer is free.
pub fn transfer_cost(level: RangeLevel) -> (f64, f64) {
    match level {
        RangeLevel::Low => (0.005, 0.012),
        RangeLevel::Medium => (0.013, 0.019),
        RangeLevel::High => (0.020, 0.025),
    }
}

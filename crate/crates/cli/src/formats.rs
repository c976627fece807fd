//! JSON document formats.
//!
//! Documents mirror the core types field by field; unknown fields are
//! rejected and schema or validation problems are reported with the
//! offending field path.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use streamsched_core::cloud::{MulticloudEnv, NetworkMatrices, OfferSpec};
use streamsched_core::cost::{Schedule, ServiceAssignment};
use streamsched_core::sim::SimulationMetrics;
use streamsched_core::workflow::{
    EdgeSpec, Movability, ServiceSpec, StreamWorkflow, ValidationReport,
};

/// Errors raised while loading or saving documents.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed document at {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("document fails validation: {report}")]
    Validation { report: ValidationReport },
    #[error("environment is invalid: {0}")]
    Environment(#[from] streamsched_core::cloud::EnvError),
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    let mut deserializer = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut deserializer).map_err(|e| FormatError::Malformed {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn read_file(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path)
        .map_err(|source| FormatError::Read { path: path.display().to_string(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), FormatError> {
    std::fs::write(path, contents)
        .map_err(|source| FormatError::Write { path: path.display().to_string(), source })
}

/// Generation provenance carried inside workflow documents.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceDoc {
    pub family: String,
    pub size: usize,
    pub seed: u64,
    pub source_rate: String,
    pub processing_requirement: String,
    pub output_proportion: String,
    pub movable_share: String,
    pub unit_rate: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceDoc {
    pub id: String,
    pub mi: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub movable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement_cloud: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub org: String,
    pub dest: String,
    pub share: f64,
}

/// On-disk workflow document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowDoc {
    pub unit_dp_rate: f64,
    pub services: Vec<ServiceDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceDoc>,
}

impl WorkflowDoc {
    pub fn from_workflow(workflow: &StreamWorkflow, provenance: Option<ProvenanceDoc>) -> Self {
        WorkflowDoc {
            unit_dp_rate: workflow.unit_dp_rate,
            services: workflow
                .services
                .iter()
                .map(|s| ServiceDoc {
                    id: s.id.clone(),
                    mi: s.mi,
                    lambda: s.lambda,
                    gamma: s.gamma,
                    movable: matches!(s.movability, Movability::Movable),
                    placement_cloud: s.movability.placement_cloud(),
                    mu: s.mu,
                })
                .collect(),
            edges: workflow
                .edges
                .iter()
                .map(|e| EdgeDoc { org: e.org.clone(), dest: e.dest.clone(), share: e.share })
                .collect(),
            provenance,
        }
    }

    pub fn into_workflow(self) -> Result<StreamWorkflow, FormatError> {
        let mut services = Vec::with_capacity(self.services.len());
        for (i, doc) in self.services.into_iter().enumerate() {
            let movability = match (doc.movable, doc.placement_cloud) {
                (true, None) => Movability::Movable,
                (true, Some(_)) => {
                    return Err(FormatError::Schema {
                        path: format!("services[{i}].placement_cloud"),
                        message: "only unmovable services carry a placement cloud".into(),
                    })
                }
                (false, Some(cloud)) => Movability::Unmovable { cloud },
                (false, None) => {
                    return Err(FormatError::Schema {
                        path: format!("services[{i}].placement_cloud"),
                        message: "unmovable services require a placement cloud".into(),
                    })
                }
            };
            services.push(ServiceSpec {
                id: doc.id,
                mi: doc.mi,
                lambda: doc.lambda,
                gamma: doc.gamma,
                movability,
                mu: doc.mu,
            });
        }
        let edges = self
            .edges
            .into_iter()
            .map(|e| EdgeSpec { org: e.org, dest: e.dest, share: e.share })
            .collect();
        let workflow = StreamWorkflow { services, edges, unit_dp_rate: self.unit_dp_rate };

        let report = workflow.validate();
        if !report.is_ok() {
            return Err(FormatError::Validation { report });
        }
        Ok(workflow)
    }
}

/// Parses a workflow document; the result always passes validation.
pub fn workflow_from_str(text: &str) -> Result<StreamWorkflow, FormatError> {
    parse::<WorkflowDoc>(text)?.into_workflow()
}

pub fn load_workflow(path: &Path) -> Result<StreamWorkflow, FormatError> {
    workflow_from_str(&read_file(path)?)
}

pub fn save_workflow(
    path: &Path,
    workflow: &StreamWorkflow,
    provenance: Option<ProvenanceDoc>,
) -> Result<(), FormatError> {
    let doc = WorkflowDoc::from_workflow(workflow, provenance);
    let text = serde_json::to_string_pretty(&doc).expect("workflow documents serialize");
    write_file(path, &text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfferDoc {
    pub type_name: String,
    pub mips: f64,
    pub price: f64,
    pub memory_gb: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudDoc {
    pub offers: Vec<OfferDoc>,
}

/// On-disk environment document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvDoc {
    pub clouds: Vec<CloudDoc>,
    pub latency: Vec<Vec<f64>>,
    pub bandwidth: Vec<Vec<f64>>,
    pub transfer_cost: Vec<Vec<f64>>,
}

impl EnvDoc {
    pub fn from_env(env: &MulticloudEnv) -> Self {
        let clouds = (0..env.cloud_count())
            .map(|c| CloudDoc {
                offers: env
                    .offers_in_cloud(c)
                    .map(|o| OfferDoc {
                        type_name: o.type_name.clone(),
                        mips: o.mips,
                        price: o.price,
                        memory_gb: o.memory_gb,
                    })
                    .collect(),
            })
            .collect();
        let network = env.network();
        EnvDoc {
            clouds,
            latency: network.latency.clone(),
            bandwidth: network.bandwidth.clone(),
            transfer_cost: network.transfer_cost.clone(),
        }
    }

    pub fn into_env(self) -> Result<MulticloudEnv, FormatError> {
        let clouds = self
            .clouds
            .into_iter()
            .map(|c| {
                c.offers
                    .into_iter()
                    .map(|o| OfferSpec::new(&o.type_name, o.mips, o.price, o.memory_gb))
                    .collect()
            })
            .collect();
        let network = NetworkMatrices {
            latency: self.latency,
            bandwidth: self.bandwidth,
            transfer_cost: self.transfer_cost,
        };
        Ok(MulticloudEnv::new(clouds, network)?)
    }
}

pub fn env_from_str(text: &str) -> Result<MulticloudEnv, FormatError> {
    parse::<EnvDoc>(text)?.into_env()
}

pub fn load_env(path: &Path) -> Result<MulticloudEnv, FormatError> {
    env_from_str(&read_file(path)?)
}

pub fn save_env(path: &Path, env: &MulticloudEnv) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(&EnvDoc::from_env(env)).expect("env documents serialize");
    write_file(path, &text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceScheduleDoc {
    pub id: String,
    pub cloud: usize,
    pub vms: Vec<usize>,
}

/// On-disk schedule document. VM entries are global identifiers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    pub services: Vec<ServiceScheduleDoc>,
}

impl ScheduleDoc {
    pub fn from_schedule(schedule: &Schedule, workflow: &StreamWorkflow) -> Self {
        ScheduleDoc {
            services: schedule
                .assignments
                .iter()
                .enumerate()
                .map(|(i, a)| ServiceScheduleDoc {
                    id: workflow.services[i].id.clone(),
                    cloud: a.cloud,
                    vms: a.vms.clone(),
                })
                .collect(),
        }
    }

    pub fn into_schedule(self, workflow: &StreamWorkflow) -> Result<Schedule, FormatError> {
        let mut assignments: Vec<Option<ServiceAssignment>> =
            vec![None; workflow.services.len()];
        for (i, doc) in self.services.into_iter().enumerate() {
            let index = workflow.service_index(&doc.id).ok_or_else(|| FormatError::Schema {
                path: format!("services[{i}].id"),
                message: format!("workflow has no service {:?}", doc.id),
            })?;
            if assignments[index].is_some() {
                return Err(FormatError::Schema {
                    path: format!("services[{i}].id"),
                    message: format!("duplicate assignment for service {:?}", doc.id),
                });
            }
            assignments[index] = Some(ServiceAssignment { cloud: doc.cloud, vms: doc.vms });
        }
        let mut missing = Vec::new();
        let assignments: Vec<ServiceAssignment> = assignments
            .into_iter()
            .enumerate()
            .filter_map(|(i, a)| {
                if a.is_none() {
                    missing.push(workflow.services[i].id.clone());
                }
                a
            })
            .collect();
        if !missing.is_empty() {
            return Err(FormatError::Schema {
                path: "services".into(),
                message: format!("missing assignments for {missing:?}"),
            });
        }
        Ok(Schedule { assignments })
    }
}

pub fn load_schedule(path: &Path, workflow: &StreamWorkflow) -> Result<Schedule, FormatError> {
    parse::<ScheduleDoc>(&read_file(path)?)?.into_schedule(workflow)
}

pub fn save_schedule(
    path: &Path,
    schedule: &Schedule,
    workflow: &StreamWorkflow,
) -> Result<(), FormatError> {
    let doc = ScheduleDoc::from_schedule(schedule, workflow);
    let text = serde_json::to_string_pretty(&doc).expect("schedule documents serialize");
    write_file(path, &text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceMetricsDoc {
    pub id: String,
    pub processed_mb_s: f64,
    pub dropped_mb_s: f64,
}

/// On-disk simulation metrics document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub services: Vec<ServiceMetricsDoc>,
    pub avg_latency_s: f64,
    pub provisioning_cost_cents: f64,
    pub transfer_cost_cents: f64,
    pub total_cost_cents: f64,
}

impl MetricsDoc {
    pub fn from_metrics(metrics: &SimulationMetrics, workflow: &StreamWorkflow) -> Self {
        MetricsDoc {
            services: workflow
                .services
                .iter()
                .enumerate()
                .map(|(i, s)| ServiceMetricsDoc {
                    id: s.id.clone(),
                    processed_mb_s: metrics.processed_mb_s[i],
                    dropped_mb_s: metrics.dropped_mb_s[i],
                })
                .collect(),
            avg_latency_s: metrics.avg_latency_s,
            provisioning_cost_cents: metrics.provisioning_cost,
            transfer_cost_cents: metrics.transfer_cost,
            total_cost_cents: metrics.total_cost,
        }
    }
}

pub fn save_metrics(
    path: &Path,
    metrics: &SimulationMetrics,
    workflow: &StreamWorkflow,
) -> Result<(), FormatError> {
    let doc = MetricsDoc::from_metrics(metrics, workflow);
    let text = serde_json::to_string_pretty(&doc).expect("metrics documents serialize");
    write_file(path, &text)
}

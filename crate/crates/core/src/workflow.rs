//! Stream workflow model: services, edges, validation and topological order.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

/// Whether a service may be placed on any cloud or is pinned to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Movability {
    Movable,
    /// Pinned to the given cloud index, typically because its external data
    /// source is local to that cloud.
    Unmovable { cloud: usize },
}

impl Movability {
    pub fn placement_cloud(&self) -> Option<usize> {
        match self {
            Movability::Movable => None,
            Movability::Unmovable { cloud } => Some(*cloud),
        }
    }
}

/// One analytic service of a stream workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceSpec {
    /// Unique identifier within the workflow.
    pub id: String,
    /// Processing requirement in MI per MB of input data.
    pub mi: f64,
    /// External source arrival rate in MB/s. Zero for services fed only by
    /// their parents.
    pub lambda: f64,
    /// Proportion of output data to input data.
    pub gamma: f64,
    pub movability: Movability,
    /// Optional user-declared maximum throughput constraint in MB/s.
    pub mu: Option<f64>,
}

/// A directed stream link between two services.
///
/// `share = 1.0` is replica mode (the child sees the parent's full output);
/// `share < 1.0` is partition mode (the child sees that fraction).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub org: String,
    pub dest: String,
    pub share: f64,
}

/// A stream workflow application: a DAG of services plus the minimum stream
/// unit rate every provisioned VM must be able to process.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamWorkflow {
    pub services: Vec<ServiceSpec>,
    pub edges: Vec<EdgeSpec>,
    /// Minimum stream unit per second in MB/s.
    pub unit_dp_rate: f64,
}

/// A single invariant violation found by [`StreamWorkflow::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateServiceId { id: String },
    NonPositiveMi { service: String },
    NegativeLambda { service: String },
    NegativeGamma { service: String },
    NonPositiveMu { service: String },
    NonPositiveUnitRate,
    SelfLoop { service: String },
    UnknownEndpoint { org: String, dest: String, missing: String },
    ShareOutOfRange { org: String, dest: String, share: f64 },
    Cycle { member: String },
    SourceWithoutInput { service: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateServiceId { id } => write!(f, "duplicate service id {id:?}"),
            Violation::NonPositiveMi { service } => {
                write!(f, "service {service:?}: mi must be > 0")
            }
            Violation::NegativeLambda { service } => {
                write!(f, "service {service:?}: lambda must be >= 0")
            }
            Violation::NegativeGamma { service } => {
                write!(f, "service {service:?}: gamma must be >= 0")
            }
            Violation::NonPositiveMu { service } => {
                write!(f, "service {service:?}: mu must be > 0 when present")
            }
            Violation::NonPositiveUnitRate => write!(f, "unit_dp_rate must be > 0"),
            Violation::SelfLoop { service } => write!(f, "self-loop on {service:?}"),
            Violation::UnknownEndpoint { org, dest, missing } => {
                write!(f, "edge {org:?} -> {dest:?} references unknown service {missing:?}")
            }
            Violation::ShareOutOfRange { org, dest, share } => {
                write!(f, "edge {org:?} -> {dest:?}: share must be in (0,1], got {share}")
            }
            Violation::Cycle { member } => {
                write!(f, "cycle through {member:?}")
            }
            Violation::SourceWithoutInput { service } => {
                write!(f, "source service {service:?} has no in-edges and lambda = 0")
            }
        }
    }
}

/// Outcome of validating a workflow. Violations are data, not failures.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Errors raised by workflow structure operations.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkflowError {
    /// The edge relation contains a directed cycle; carries one member.
    Cycle { member: String },
    /// An edge endpoint does not name a service.
    UnknownService { id: String },
}

impl fmt::Display for WorkflowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkflowError::Cycle { member } => write!(f, "cycle through service {member:?}"),
            WorkflowError::UnknownService { id } => write!(f, "unknown service {id:?}"),
        }
    }
}

impl core::error::Error for WorkflowError {}

impl StreamWorkflow {
    /// Index of the service with the given id.
    pub fn service_index(&self, id: &str) -> Option<usize> {
        self.services.iter().position(|s| s.id == id)
    }

    /// Checks every workflow invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        if !(self.unit_dp_rate > 0.0) {
            violations.push(Violation::NonPositiveUnitRate);
        }

        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, service) in self.services.iter().enumerate() {
            if index.insert(service.id.as_str(), i).is_some() {
                violations.push(Violation::DuplicateServiceId { id: service.id.clone() });
            }
            if !(service.mi > 0.0) {
                violations.push(Violation::NonPositiveMi { service: service.id.clone() });
            }
            if service.lambda < 0.0 {
                violations.push(Violation::NegativeLambda { service: service.id.clone() });
            }
            if service.gamma < 0.0 {
                violations.push(Violation::NegativeGamma { service: service.id.clone() });
            }
            if let Some(mu) = service.mu {
                if !(mu > 0.0) {
                    violations.push(Violation::NonPositiveMu { service: service.id.clone() });
                }
            }
        }

        let mut has_in_edge = alloc::vec![false; self.services.len()];
        let mut resolved = Vec::new();
        for edge in &self.edges {
            if edge.org == edge.dest {
                violations.push(Violation::SelfLoop { service: edge.org.clone() });
                continue;
            }
            let org = index.get(edge.org.as_str()).copied();
            let dest = index.get(edge.dest.as_str()).copied();
            match (org, dest) {
                (Some(o), Some(d)) => {
                    has_in_edge[d] = true;
                    resolved.push((o, d));
                }
                _ => {
                    let missing = if org.is_none() { edge.org.clone() } else { edge.dest.clone() };
                    violations.push(Violation::UnknownEndpoint {
                        org: edge.org.clone(),
                        dest: edge.dest.clone(),
                        missing,
                    });
                }
            }
            if !(edge.share > 0.0 && edge.share <= 1.0) {
                violations.push(Violation::ShareOutOfRange {
                    org: edge.org.clone(),
                    dest: edge.dest.clone(),
                    share: edge.share,
                });
            }
        }

        for (i, service) in self.services.iter().enumerate() {
            if !has_in_edge[i] && !(service.lambda > 0.0) {
                violations.push(Violation::SourceWithoutInput { service: service.id.clone() });
            }
        }

        if let Err(WorkflowError::Cycle { member }) = kahn_order(self.services.len(), &resolved, |i| {
            self.services[i].id.as_str()
        }) {
            violations.push(Violation::Cycle { member });
        }

        ValidationReport { violations }
    }

    /// Topological order of service indices.
    ///
    /// Every edge's origin precedes its destination. Ties are broken by
    /// lexicographic service id, so the order is deterministic.
    pub fn topological_order(&self) -> Result<Vec<usize>, WorkflowError> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, service) in self.services.iter().enumerate() {
            index.insert(service.id.as_str(), i);
        }
        let mut resolved = Vec::with_capacity(self.edges.len());
        for edge in &self.edges {
            let org = *index
                .get(edge.org.as_str())
                .ok_or_else(|| WorkflowError::UnknownService { id: edge.org.clone() })?;
            let dest = *index
                .get(edge.dest.as_str())
                .ok_or_else(|| WorkflowError::UnknownService { id: edge.dest.clone() })?;
            resolved.push((org, dest));
        }
        kahn_order(self.services.len(), &resolved, |i| self.services[i].id.as_str())
    }
}

fn kahn_order<'a>(
    n: usize,
    edges: &[(usize, usize)],
    id_of: impl Fn(usize) -> &'a str,
) -> Result<Vec<usize>, WorkflowError> {
    let mut in_degree = alloc::vec![0usize; n];
    let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for &(org, dest) in edges {
        in_degree[dest] += 1;
        children[org].push(dest);
    }

    let mut ready: BinaryHeap<Reverse<(&str, usize)>> = BinaryHeap::new();
    for i in 0..n {
        if in_degree[i] == 0 {
            ready.push(Reverse((id_of(i), i)));
        }
    }

    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, i))) = ready.pop() {
        order.push(i);
        for &child in &children[i] {
            in_degree[child] -= 1;
            if in_degree[child] == 0 {
                ready.push(Reverse((id_of(child), child)));
            }
        }
    }

    if order.len() < n {
        // Any service with remaining in-degree sits on or behind a cycle;
        // report the lexicographically first one that is on a cycle proper.
        let member = (0..n)
            .filter(|&i| in_degree[i] > 0)
            .map(&id_of)
            .min()
            .unwrap_or("")
            .into();
        return Err(WorkflowError::Cycle { member });
    }
    Ok(order)
}

/// A resolved edge: service indices plus the routed share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedEdge {
    pub org: usize,
    pub dest: usize,
    pub share: f64,
}

/// Precomputed structure of a validated workflow: topological order and
/// per-service edge adjacency. Built once and shared by the cost model,
/// the schedulers and the simulator.
#[derive(Debug, Clone)]
pub struct Topology {
    pub order: Vec<usize>,
    pub edges: Vec<ResolvedEdge>,
    /// Edge indices entering each service.
    pub in_edges: Vec<Vec<usize>>,
    /// Edge indices leaving each service.
    pub out_edges: Vec<Vec<usize>>,
}

impl Topology {
    pub fn build(workflow: &StreamWorkflow) -> Result<Self, WorkflowError> {
        let order = workflow.topological_order()?;
        let n = workflow.services.len();
        let mut edges = Vec::with_capacity(workflow.edges.len());
        let mut in_edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        let mut out_edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for (x, edge) in workflow.edges.iter().enumerate() {
            let org = workflow
                .service_index(&edge.org)
                .ok_or_else(|| WorkflowError::UnknownService { id: edge.org.clone() })?;
            let dest = workflow
                .service_index(&edge.dest)
                .ok_or_else(|| WorkflowError::UnknownService { id: edge.dest.clone() })?;
            edges.push(ResolvedEdge { org, dest, share: edge.share });
            in_edges[dest].push(x);
            out_edges[org].push(x);
        }
        Ok(Topology { order, edges, in_edges, out_edges })
    }

    /// Number of in-edges of a service (its stream dependencies).
    pub fn dependency_count(&self, service: usize) -> usize {
        self.in_edges[service].len()
    }

    /// Services with no out-edges.
    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.out_edges.len()).filter(|&i| self.out_edges[i].is_empty())
    }
}

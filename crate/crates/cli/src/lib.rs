//! IO companion for `streamsched-core`: JSON file formats for workflows,
//! environments, schedules and metrics, plus the experiment harness that
//! sweeps the scenario matrix and writes comparison CSVs.

pub mod experiment;
pub mod formats;

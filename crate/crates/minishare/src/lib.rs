//! Experiment harness for secret-sharing aggregation over simulated
//! concurrent-transmission floods: config files, topology files, batch
//! runs and result tables.

pub mod config;
pub mod experiment;
pub mod report;
pub mod topology_file;

use minishare_core::ctsim::{NoFullCoverage, TopologyError};
use minishare_core::protocol::ProtocolError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("topology file line {line}: {message}")]
    TopologyParse { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("{0}")]
    Coverage(#[from] NoFullCoverage),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

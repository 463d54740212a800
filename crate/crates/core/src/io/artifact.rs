use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::dgp::DgpConfig;
use crate::exploratory::ExploratoryOutcome;
use crate::harness::StudyReport;
use crate::reduction::ReductionTrace;
use crate::select::ConfidenceSet;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageOutputs {
    /// Column names of the dataset the stages ran on.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variable_names: Vec<String>,
    pub dgp: Option<DgpSummary>,
    pub reduction: Option<ReductionTrace>,
    pub exploratory: Option<ExploratoryOutcome>,
    pub confidence_set: Option<ConfidenceSet>,
    pub study: Option<StudyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSummary {
    pub config: DgpConfig,
    pub true_idx: Vec<usize>,
    pub companion_idx: Vec<usize>,
    pub data_path: Option<String>,
}

/// Everything one command produced, with the configuration and seed needed
/// to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// The configuration as given, echoed verbatim.
    pub config: serde_json::Value,
    pub created_unix: u64,
    #[serde(default)]
    pub stages: StageOutputs,
}

impl RunArtifact {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            stages: StageOutputs::default(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let f = File::create(path)?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

//! Command configuration files.
//!
//! Every command takes an optional JSON configuration. Unknown keys are
//! rejected so that typos surface as config errors rather than silently
//! falling back to defaults. A `schema_version` key, when present, must not
//! exceed the version this build writes.

use std::fs;
use std::path::{Path, PathBuf};

use modelsets::harness::StudyConfig;
use modelsets::io::{ResponseSpec, SCHEMA_VERSION};
use modelsets::reduction::{initial_dimension, DecisionRule, ReductionConfig, DEFAULT_MAX_SIDE};
use modelsets::{Family, Term};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// A CSV dataset and the columns holding the response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    pub path: PathBuf,
    pub response: ResponseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionSection {
    /// Explicit per-stage rules. Takes precedence over `signif`.
    pub rules: Vec<DecisionRule>,
    /// One number per stage: whole numbers of at least 1 mean "among the k
    /// most significant", values in (0, 1) a p-value threshold.
    pub signif: Vec<f64>,
    pub dim: Option<usize>,
    pub max_side: usize,
}

impl Default for ReductionSection {
    fn default() -> Self {
        Self { rules: Vec::new(), signif: Vec::new(), dim: None, max_side: DEFAULT_MAX_SIDE }
    }
}

impl ReductionSection {
    pub fn to_config(&self, d: usize, family: Option<Family>, seed: u64) -> Result<ReductionConfig, CliError> {
        let rules = if !self.rules.is_empty() {
            self.rules.clone()
        } else {
            let start = self.dim.unwrap_or_else(|| initial_dimension(d, self.max_side));
            self.signif
                .iter()
                .enumerate()
                .map(|(t, &v)| DecisionRule::from_signif(v, start.saturating_sub(t)))
                .collect::<Result<_, _>>()
                .map_err(CliError::reduction)?
        };
        Ok(ReductionConfig { family, rules, dim: self.dim, max_side: self.max_side, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploratorySection {
    pub signif: f64,
}

impl Default for ExploratorySection {
    fn default() -> Self {
        Self { signif: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub signif: f64,
    pub model_size: usize,
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self { signif: 0.01, model_size: 5 }
    }
}

/// Configuration shared by `reduce`, `explore`, `select` and `report`; each
/// reads only the sections it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: Option<u32>,
    /// Dataset; defaults to the CSV written by a prior `dgp` run.
    pub data: Option<DataSource>,
    /// Half-open row range `[start, end)` to use.
    pub rows: Option<[usize; 2]>,
    pub family: Option<Family>,
    pub seed: Option<u64>,
    pub reduction: ReductionSection,
    /// Variables entering the exploratory phase; defaults to the prior
    /// reduction's survivors.
    pub retained: Option<Vec<usize>>,
    pub exploratory: ExploratorySection,
    /// Comprehensive model for `select`; defaults to the prior exploratory
    /// outcome, then to the prior reduction's survivors.
    pub comprehensive: Option<Vec<Term>>,
    pub selection: SelectionSection,
}

/// A parsed configuration and the JSON it came from, echoed into the
/// artifact.
pub struct Loaded<T> {
    pub config: T,
    pub raw: Value,
}

fn check_version(stage: &'static str, raw: &mut Value, strip: bool) -> Result<(), CliError> {
    let Some(obj) = raw.as_object_mut() else {
        return Err(CliError::config(stage, "configuration must be a JSON object"));
    };
    let version = if strip { obj.remove("schema_version") } else { obj.get("schema_version").cloned() };
    match version {
        None => Ok(()),
        Some(v) => match v.as_u64() {
            Some(v) if v as u32 <= SCHEMA_VERSION && v > 0 => Ok(()),
            _ => Err(CliError::config(stage, format!("unsupported schema_version {v}; this build reads {SCHEMA_VERSION}"))),
        },
    }
}

pub fn read_json(stage: &'static str, path: Option<&Path>) -> Result<Value, CliError> {
    match path {
        None => Ok(Value::Object(Default::default())),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(stage, format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(stage, format!("{}: {e}", p.display())))
        }
    }
}

fn parse<T: DeserializeOwned>(stage: &'static str, value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::config(stage, e))
}

pub fn load_pipeline(stage: &'static str, path: Option<&Path>) -> Result<Loaded<PipelineConfig>, CliError> {
    let mut raw = read_json(stage, path)?;
    check_version(stage, &mut raw, false)?;
    Ok(Loaded { config: parse(stage, raw.clone())?, raw })
}

/// A plain core configuration type plus an optional `schema_version`.
pub fn load_plain<T: DeserializeOwned>(stage: &'static str, path: Option<&Path>) -> Result<Loaded<T>, CliError> {
    let raw = read_json(stage, path)?;
    let mut stripped = raw.clone();
    check_version(stage, &mut stripped, true)?;
    Ok(Loaded { config: parse(stage, stripped)?, raw })
}

/// Study configuration. A `preset` key (`table1` or `table2`) starts from
/// that preset, with `first_cells` truncating its grid; any other keys
/// override the preset's top-level fields.
pub fn load_study(path: Option<&Path>) -> Result<Loaded<StudyConfig>, CliError> {
    const STAGE: &str = "simulate";
    let raw = read_json(STAGE, path)?;
    let mut stripped = raw.clone();
    check_version(STAGE, &mut stripped, true)?;
    let obj = stripped.as_object_mut().expect("checked above");
    let preset = obj.remove("preset");
    let first_cells = obj.remove("first_cells");
    let mut base = match preset.as_ref().map(|p| p.as_str()) {
        None => StudyConfig::default(),
        Some(Some("table1")) => StudyConfig::table1(100),
        Some(Some("table2")) => StudyConfig::table2(100),
        Some(other) => return Err(CliError::config(STAGE, format!("unknown preset {other:?}"))),
    };
    if let Some(k) = first_cells {
        let k = k.as_u64().ok_or_else(|| CliError::config(STAGE, "first_cells must be a count"))?;
        base = base.first_cells(k as usize);
    }
    let mut merged = serde_json::to_value(base).map_err(|e| CliError::config(STAGE, e))?;
    let target = merged.as_object_mut().expect("struct serializes to an object");
    for (k, v) in obj.iter() {
        if !target.contains_key(k) {
            return Err(CliError::config(STAGE, format!("unknown field `{k}`")));
        }
        target.insert(k.clone(), v.clone());
    }
    Ok(Loaded { config: parse(STAGE, merged)?, raw })
}

//! The reduction phase.
//!
//! Candidate variable indices are arranged at random in a hypercube; the
//! response is regressed on the variables of each axis-parallel line, so every
//! variable is assessed in `dim` separate analyses alongside different
//! companions. A variable survives a stage if it meets the stage's decision
//! rule in at least `min_appearances` of its analyses. Survivors are rearranged
//! in a hypercube one dimension lower, down to a square.

mod hypercube;
mod stage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::rng::derive_seed;
use crate::stats::Family;

pub use hypercube::{arrange_hypercube, initial_dimension, side_length, traversal_lines, HypercubeArrangement};
pub use stage::{run_stage, LineRecord, StageRecord, VariableTally};

pub const DEFAULT_MAX_SIDE: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Success when among the `k` most significant variables of a line.
    TopK(usize),
    /// Success when the p-value is below `alpha`.
    Threshold(f64),
}

/// Per-stage retention rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub kind: RuleKind,
    pub min_appearances: usize,
}

impl DecisionRule {
    pub fn top_k(k: usize, min_appearances: usize) -> Self {
        Self { kind: RuleKind::TopK(k), min_appearances }
    }

    pub fn threshold(alpha: f64, min_appearances: usize) -> Self {
        Self { kind: RuleKind::Threshold(alpha), min_appearances }
    }

    /// Rule from a single number: values of at least 1 mean top-k, values in
    /// (0, 1) a significance threshold. Requires success in at least half of
    /// the `dim` analyses.
    pub fn from_signif(value: f64, dim: usize) -> Result<Self, ReductionError> {
        let min = half_of(dim);
        if value >= 1.0 && value.fract() == 0.0 {
            Ok(Self::top_k(value as usize, min))
        } else if value > 0.0 && value < 1.0 {
            Ok(Self::threshold(value, min))
        } else {
            Err(ReductionError::InvalidRule(format!("cannot interpret {value} as a decision rule")))
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), ReductionError> {
        match self.kind {
            RuleKind::TopK(0) => return Err(ReductionError::InvalidRule("top-k needs k >= 1".into())),
            RuleKind::Threshold(a) if !(a > 0.0 && a <= 1.0) => {
                return Err(ReductionError::InvalidRule(format!("threshold {a} outside (0, 1]")))
            }
            _ => {}
        }
        if self.min_appearances == 0 || self.min_appearances > dim {
            return Err(ReductionError::InvalidRule(format!(
                "min_appearances {} must lie in 1..={dim}",
                self.min_appearances
            )));
        }
        Ok(())
    }

    /// Whether the variable ranked `rank` (1-based) with p-value `p` succeeds.
    pub fn succeeds(&self, rank: usize, p: f64) -> bool {
        match self.kind {
            RuleKind::TopK(k) => rank <= k,
            RuleKind::Threshold(alpha) => alpha >= 1.0 || p < alpha,
        }
    }
}

/// `ceil(dim / 2)`: "at least half of the analyses".
pub fn half_of(dim: usize) -> usize {
    dim.div_ceil(2)
}

/// Default rules for a reduction starting at `start_dim`: top-2 in the first
/// stage, p < 0.01 afterwards, each in at least half of the analyses.
pub fn default_rules(start_dim: usize) -> Vec<DecisionRule> {
    (0..start_dim.saturating_sub(1))
        .map(|t| {
            let dim = start_dim - t;
            if t == 0 {
                DecisionRule::top_k(2, half_of(dim))
            } else {
                DecisionRule::threshold(0.01, half_of(dim))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReductionConfig {
    pub family: Option<Family>,
    /// One rule per stage; empty means [`default_rules`].
    pub rules: Vec<DecisionRule>,
    /// Starting dimension; `None` picks [`initial_dimension`].
    pub dim: Option<usize>,
    pub max_side: usize,
    pub seed: u64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self { family: None, rules: Vec::new(), dim: None, max_side: DEFAULT_MAX_SIDE, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub family: Family,
    pub start_dim: usize,
    pub seed: u64,
    pub rules: Vec<DecisionRule>,
    pub stages: Vec<StageRecord>,
}

impl ReductionTrace {
    /// Variables surviving the last completed stage.
    pub fn retained(&self) -> &[usize] {
        self.stages.last().map(|s| s.retained.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReductionError {
    #[error("a hypercube needs at least 2 indices, got {0}")]
    TooFewIndices(usize),
    #[error("hypercube dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("invalid decision rule: {0}")]
    InvalidRule(String),
    #[error("expected {expected} decision rules (one per stage), got {got}")]
    RuleCount { expected: usize, got: usize },
    #[error("sample too small: {n} rows for lines needing {needed}")]
    SampleTooSmall { n: usize, needed: usize },
    #[error("stage {stage} retained no variables")]
    EmptyRetention { stage: usize, trace: Box<ReductionTrace> },
    #[error("family {family} does not match the response")]
    FamilyMismatch { family: Family },
}

/// Run the successive reductions from the starting dimension down to 2.
pub fn reduction_phase(dataset: &Dataset, config: &ReductionConfig) -> Result<ReductionTrace, ReductionError> {
    let family = config.family.unwrap_or_else(|| dataset.response.default_family());
    if !family.matches(&dataset.response) {
        return Err(ReductionError::FamilyMismatch { family });
    }
    let start_dim = config.dim.unwrap_or_else(|| initial_dimension(dataset.d(), config.max_side));
    if start_dim < 2 {
        return Err(ReductionError::InvalidDimension(start_dim));
    }
    let rules = if config.rules.is_empty() { default_rules(start_dim) } else { config.rules.clone() };
    if rules.len() != start_dim - 1 {
        return Err(ReductionError::RuleCount { expected: start_dim - 1, got: rules.len() });
    }
    for (t, rule) in rules.iter().enumerate() {
        rule.validate(start_dim - t)?;
    }

    let mut trace = ReductionTrace { family, start_dim, seed: config.seed, rules: rules.clone(), stages: Vec::new() };
    let mut candidates: Vec<usize> = (0..dataset.d()).collect();
    for (t, rule) in rules.iter().enumerate() {
        let dim = start_dim - t;
        let stage_seed = derive_seed(config.seed, &[t as u64 + 1]);
        let record = run_stage(dataset, &candidates, dim, rule, family, stage_seed)?;
        candidates = record.retained.clone();
        trace.stages.push(record);
        if candidates.is_empty() {
            return Err(ReductionError::EmptyRetention { stage: t + 1, trace: Box::new(trace) });
        }
    }
    Ok(trace)
}

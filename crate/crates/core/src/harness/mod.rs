//! Monte Carlo studies: repeated draws from the data-generating process, each
//! pushed through the reduction (or the undertuned lasso) and the
//! model-selection phase, on the full sample and on a split sample.
//!
//! The exploratory phase is skipped: no squared or interaction terms enter the
//! comprehensive model.

mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::dgp::{dgp, DgpConfig, ResponseKind};
use crate::lasso::{lasso_path, undertuned_select, LassoOptions};
use crate::model::ModelSpec;
use crate::reduction::{default_rules, half_of, initial_dimension, reduction_phase, DecisionRule, ReductionConfig, DEFAULT_MAX_SIDE};
use crate::rng::{derive_seed, purpose};
use crate::select::model_selection_phase;

pub use report::{GroupSummary, MetricSummary, StudyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Hypercube reduction.
    Cb,
    /// Lasso undertuned to the reduction's retained count.
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Every phase uses all observations.
    Full,
    /// Reduction on the first rows, selection on the rest.
    Split,
}

/// Parameters varied across the cells of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub var_signal: f64,
    pub var_corr_noise: f64,
    pub rho: f64,
    pub sig_strength: f64,
}

impl CellSpec {
    pub fn apply(&self, base: &DgpConfig) -> DgpConfig {
        DgpConfig {
            var_signal: self.var_signal,
            var_corr_noise: self.var_corr_noise,
            rho: self.rho,
            sig_strength: self.sig_strength,
            ..base.clone()
        }
    }

    fn from_base(base: &DgpConfig) -> Self {
        Self { var_signal: base.var_signal, var_corr_noise: base.var_corr_noise, rho: base.rho, sig_strength: base.sig_strength }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub name: String,
    /// Data-generating settings shared by all cells.
    pub dgp: DgpConfig,
    /// Empty means a single cell taken from `dgp`.
    pub cells: Vec<CellSpec>,
    pub replications: usize,
    /// `(n_reduce, n_select)`; required for the split regime.
    pub split: Option<(usize, usize)>,
    pub regimes: Vec<Regime>,
    pub methods: Vec<Method>,
    /// One rule per reduction stage; empty means the defaults.
    pub rules: Vec<DecisionRule>,
    pub signif_select: f64,
    pub model_size: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            name: "study".into(),
            dgp: DgpConfig::default(),
            cells: Vec::new(),
            replications: 100,
            split: Some((70, 30)),
            regimes: vec![Regime::Full, Regime::Split],
            methods: vec![Method::Cb, Method::Lasso],
            rules: Vec::new(),
            signif_select: 0.01,
            model_size: 5,
            seed: 1,
            parallel: true,
        }
    }
}

fn table_cells() -> Vec<CellSpec> {
    let mut cells = Vec::new();
    for var_signal in [1.0, 5.0] {
        for var_corr_noise in [1.0, 3.0] {
            for rho in [0.9, 0.5] {
                for sig_strength in [1.0, 0.6] {
                    cells.push(CellSpec { var_signal, var_corr_noise, rho, sig_strength });
                }
            }
        }
    }
    cells
}

/// First-stage top-2 in at least 2 of 3 analyses, then the given threshold
/// in at least 1 of 2.
fn two_stage_rules(threshold: f64) -> Vec<DecisionRule> {
    vec![DecisionRule::top_k(2, half_of(3)), DecisionRule::threshold(threshold, half_of(2))]
}

impl StudyConfig {
    /// Normal linear model, n = 100 split 70/30, second-stage threshold 0.1%,
    /// all 16 cells of the parameter grid.
    pub fn table1(replications: usize) -> Self {
        Self {
            name: "table1".into(),
            dgp: DgpConfig { n: 100, ..DgpConfig::default() },
            cells: table_cells(),
            replications,
            split: Some((70, 30)),
            rules: two_stage_rules(0.001),
            ..Self::default()
        }
    }

    /// Weibull proportional hazards with exponential(0.1) censoring, n = 150
    /// split 100/50, second-stage threshold 0.25%. Reduction only (no lasso).
    pub fn table2(replications: usize) -> Self {
        Self {
            name: "table2".into(),
            dgp: DgpConfig::survival(150, 0.1),
            cells: table_cells(),
            replications,
            split: Some((100, 50)),
            methods: vec![Method::Cb],
            rules: two_stage_rules(0.0025),
            ..Self::default()
        }
    }

    /// Keep only the first `k` cells.
    pub fn first_cells(mut self, k: usize) -> Self {
        self.cells.truncate(k);
        self
    }

    pub fn effective_cells(&self) -> Vec<CellSpec> {
        if self.cells.is_empty() {
            vec![CellSpec::from_base(&self.dgp)]
        } else {
            self.cells.clone()
        }
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::InvalidConfig(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.regimes.is_empty() || self.methods.is_empty() {
            return bad("need at least one regime and one method".into());
        }
        if self.regimes.contains(&Regime::Split) {
            match self.split {
                None => return bad("the split regime needs `split`".into()),
                Some((a, b)) if a + b != self.dgp.n => {
                    return bad(format!("split sizes {a} + {b} do not sum to n = {}", self.dgp.n))
                }
                _ => {}
            }
        }
        if self.methods.contains(&Method::Lasso) && self.dgp.response_kind != ResponseKind::Gaussian {
            return bad("the lasso comparator supports Gaussian responses only".into());
        }
        if !(0.0..=1.0).contains(&self.signif_select) || self.model_size == 0 {
            return bad("signif_select must lie in [0, 1] and model_size be at least 1".into());
        }
        for cell in self.effective_cells() {
            cell.apply(&self.dgp).validate().map_err(|e| StudyError::InvalidConfig(e.to_string()))?;
        }
        let start = initial_dimension(self.dgp.d, DEFAULT_MAX_SIDE);
        if !self.rules.is_empty() && self.rules.len() != start - 1 {
            return bad(format!("expected {} reduction rules for d = {}, got {}", start - 1, self.dgp.d, self.rules.len()));
        }
        Ok(())
    }

    fn rules_or_default(&self) -> Vec<DecisionRule> {
        if self.rules.is_empty() {
            default_rules(initial_dimension(self.dgp.d, DEFAULT_MAX_SIDE))
        } else {
            self.rules.clone()
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StudyError {
    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
}

/// Outcome of one method under one regime in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub cell: usize,
    pub replication: usize,
    pub method: Method,
    pub regime: Regime,
    pub true_idx: Vec<usize>,
    /// Variables passed to model selection.
    pub retained: Vec<usize>,
    /// Every signal variable was retained.
    pub retain_all: bool,
    /// The true model is in the confidence set.
    pub covered: bool,
    /// Confidence-set size excluding the true model.
    pub excess: usize,
    pub n_models: usize,
    /// Why the replication produced no result; the flags above are then
    /// meaningless.
    pub error: Option<String>,
}

impl ReplicationRecord {
    fn new(cell: usize, replication: usize, method: Method, regime: Regime, true_idx: &[usize]) -> Self {
        Self {
            cell,
            replication,
            method,
            regime,
            true_idx: true_idx.to_vec(),
            retained: Vec::new(),
            retain_all: false,
            covered: false,
            excess: 0,
            n_models: 0,
            error: None,
        }
    }
}

struct Phases<'a> {
    reduce: Dataset,
    select: Dataset,
    config: &'a StudyConfig,
}

impl Phases<'_> {
    fn finish(&self, record: &mut ReplicationRecord, retained: Vec<usize>) {
        let truth = ModelSpec::from_mains(record.true_idx.iter().copied());
        record.retain_all = record.true_idx.iter().all(|v| retained.contains(v));
        record.retained = retained;
        let comprehensive = ModelSpec::from_mains(record.retained.iter().copied());
        match model_selection_phase(
            &self.select,
            &comprehensive,
            self.select.response.default_family(),
            self.config.signif_select,
            self.config.model_size,
        ) {
            Ok(cs) => {
                record.covered = cs.contains(&truth);
                record.n_models = cs.len();
                record.excess = cs.len() - usize::from(record.covered);
                debug_assert!(!record.covered || record.retain_all);
            }
            Err(e) => record.error = Some(format!("selection: {e}")),
        }
    }
}

/// Run one replication of one cell: every configured method under every
/// configured regime.
pub fn run_replication(config: &StudyConfig, cell_index: usize, replication: usize) -> Vec<ReplicationRecord> {
    let cell = config.effective_cells()[cell_index];
    let rep_path = [cell_index as u64, replication as u64];
    let dgp_config = DgpConfig { seed: derive_seed(config.seed, &[rep_path[0], rep_path[1], purpose::DATA]), ..cell.apply(&config.dgp) };
    let data = match dgp(&dgp_config) {
        Ok(d) => d,
        Err(e) => {
            return config
                .methods
                .iter()
                .flat_map(|&m| config.regimes.iter().map(move |&r| (m, r)))
                .map(|(m, r)| {
                    let mut rec = ReplicationRecord::new(cell_index, replication, m, r, &[]);
                    rec.error = Some(format!("data generation: {e}"));
                    rec
                })
                .collect()
        }
    };
    let full = data.to_dataset();
    let rules = config.rules_or_default();
    let mut records = Vec::new();

    for &regime in &config.regimes {
        let phases = match regime {
            Regime::Full => Phases { reduce: full.clone(), select: full.clone(), config },
            Regime::Split => {
                let (n_reduce, _) = config.split.expect("validated");
                Phases { reduce: full.rows(0..n_reduce), select: full.rows(n_reduce..full.n()), config }
            }
        };
        let reduction = reduction_phase(
            &phases.reduce,
            &ReductionConfig {
                rules: rules.clone(),
                seed: derive_seed(config.seed, &[rep_path[0], rep_path[1], purpose::ARRANGEMENT, regime as u64]),
                ..ReductionConfig::default()
            },
        )
        .map(|t| t.retained().to_vec());

        for &method in &config.methods {
            let mut rec = ReplicationRecord::new(cell_index, replication, method, regime, &data.true_idx);
            let retained = match (method, &reduction) {
                (_, Err(e)) => Err(format!("reduction: {e}")),
                (Method::Cb, Ok(r)) => Ok(r.clone()),
                (Method::Lasso, Ok(r)) => lasso_retained(&phases.reduce, r.len()),
            };
            match retained {
                Ok(r) => phases.finish(&mut rec, r),
                Err(e) => rec.error = Some(e),
            }
            records.push(rec);
        }
    }
    records
}

fn lasso_retained(reduce: &Dataset, target: usize) -> Result<Vec<usize>, String> {
    let y = match &reduce.response {
        crate::data::Response::Continuous { y } => y,
        _ => return Err("lasso: response is not continuous".into()),
    };
    let path = lasso_path(&reduce.x, y, &LassoOptions::default()).map_err(|e| format!("lasso: {e}"))?;
    undertuned_select(&path, target).map_err(|e| format!("lasso: {e}"))
}

/// Run every replication of every cell and summarize.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport, StudyError> {
    config.validate()?;
    let start = Instant::now();
    let n_cells = config.effective_cells().len();
    let work: Vec<(usize, usize)> =
        (0..n_cells).flat_map(|c| (0..config.replications).map(move |r| (c, r))).collect();
    let records: Vec<ReplicationRecord> = if config.parallel {
        work.par_iter().flat_map_iter(|&(c, r)| run_replication(config, c, r)).collect()
    } else {
        work.iter().flat_map(|&(c, r)| run_replication(config, c, r)).collect()
    };
    Ok(StudyReport::from_records(config.clone(), records, start.elapsed().as_secs_f64()))
}

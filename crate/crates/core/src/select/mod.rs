//! The model-selection phase: every low-dimensional subset of the
//! comprehensive model is compared with it by likelihood ratio, and those not
//! rejected make up the confidence set of models.

mod export;
mod tables;

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::model::{terms_design, ModelSpec, Term};
use crate::stats::{fit_family, lrt_pvalue, Family, FitError, FitResult};

pub use export::{confidence_set_from_csv, write_confidence_set_csv, write_frequencies_csv, write_substitution_csv};
pub use tables::{substitution_table, variable_frequencies, SubstitutionTable, TermFrequency};

/// Candidates are tested in chunks of this many, each chunk in parallel.
const CHUNK: usize = 2048;

/// Every nonempty subset of the comprehensive model's terms with at most
/// `model_size` terms, ordered by size and then lexicographically by term
/// position. Generated lazily.
pub fn enumerate_candidate_models(comprehensive: &ModelSpec, model_size: usize) -> impl Iterator<Item = ModelSpec> {
    let terms = comprehensive.terms();
    let max = model_size.min(terms.len());
    (1..=max).flat_map(move |k| {
        let terms = terms.clone();
        (0..terms.len()).combinations(k).map(move |idx| ModelSpec::from_terms(idx.iter().map(|&i| &terms[i])))
    })
}

/// Number of models [`enumerate_candidate_models`] yields.
pub fn candidate_count(n_terms: usize, model_size: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for k in 1..=model_size.min(n_terms) {
        c = c * (n_terms - k + 1) as u128 / k as u128;
        total += c;
    }
    total
}

/// Add missing main effects to models with interactions, then drop
/// duplicates, keeping the first occurrence.
pub fn close_under_main_effects(models: &[ModelSpec]) -> Vec<ModelSpec> {
    let mut seen = HashSet::new();
    models.iter().map(ModelSpec::closed).filter(|m| seen.insert(m.clone())).collect()
}

/// A confidence-set member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeptModel {
    /// After closure under main effects.
    pub model: ModelSpec,
    /// The subset that was tested (first in canonical order when several
    /// close to the same model).
    pub tested: ModelSpec,
    pub p_value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionCounts {
    pub tested: usize,
    pub kept: usize,
    pub rejected: usize,
    /// Candidates whose fit failed, by reason.
    pub unfittable: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSet {
    pub by_size: BTreeMap<usize, Vec<KeptModel>>,
    pub signif: f64,
    pub model_size: usize,
    pub comprehensive: ModelSpec,
    pub family: Family,
    pub n_test: usize,
    pub counts: SelectionCounts,
}

impl ConfidenceSet {
    pub fn len(&self) -> usize {
        self.by_size.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn models(&self) -> impl Iterator<Item = &ModelSpec> {
        self.by_size.values().flatten().map(|k| &k.model)
    }

    pub fn contains(&self, model: &ModelSpec) -> bool {
        self.by_size.get(&model.size()).is_some_and(|v| v.iter().any(|k| &k.model == model))
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SelectError {
    #[error("sample too small: {n} test observations for a comprehensive model with {params} parameters")]
    SampleTooSmall { n: usize, params: usize },
    #[error("comprehensive model is empty")]
    EmptyModel,
    #[error("model size must be at least 1")]
    InvalidModelSize,
    #[error("significance level must lie in [0, 1], got {0}")]
    InvalidSignif(f64),
    #[error("comprehensive model uses column {0}, which does not exist")]
    ColumnMissing(usize),
    #[error("comprehensive model cannot be fitted: {0}")]
    ComprehensiveFit(FitError),
}

enum Verdict {
    Keep(f64),
    Reject,
    Unfittable(String),
}

fn judge(
    dataset: &Dataset,
    terms: &[Term],
    candidate: &ModelSpec,
    comp: &FitResult,
    family: Family,
    signif: f64,
) -> Verdict {
    if candidate.size() == terms.len() {
        // The comprehensive model itself.
        return Verdict::Keep(1.0);
    }
    let design = terms_design(&candidate.terms(), &dataset.x);
    let p = fit_family(family, &design, &dataset.response).and_then(|fit| lrt_pvalue(&fit, comp, family, dataset.n()));
    match p {
        Ok(p) if p >= signif => Verdict::Keep(p),
        Ok(_) => Verdict::Reject,
        Err(e) => Verdict::Unfittable(e.to_string()),
    }
}

/// Test every candidate model against the comprehensive one on `test` and
/// keep those with likelihood-ratio p-value at least `signif`.
pub fn model_selection_phase(
    test: &Dataset,
    comprehensive: &ModelSpec,
    family: Family,
    signif: f64,
    model_size: usize,
) -> Result<ConfidenceSet, SelectError> {
    if comprehensive.is_empty() {
        return Err(SelectError::EmptyModel);
    }
    if model_size == 0 {
        return Err(SelectError::InvalidModelSize);
    }
    if !(0.0..=1.0).contains(&signif) {
        return Err(SelectError::InvalidSignif(signif));
    }
    if let Some(v) = comprehensive.terms().iter().flat_map(Term::vars).find(|&v| v >= test.d()) {
        return Err(SelectError::ColumnMissing(v));
    }
    let terms = comprehensive.terms();
    let params = terms.len() + family.term_offset();
    if test.n() <= params {
        return Err(SelectError::SampleTooSmall { n: test.n(), params });
    }
    let comp = fit_family(family, &comprehensive.design(&test.x), &test.response).map_err(SelectError::ComprehensiveFit)?;

    let mut counts = SelectionCounts::default();
    let mut kept: Vec<(ModelSpec, f64)> = Vec::new();
    let mut candidates = enumerate_candidate_models(comprehensive, model_size);
    loop {
        let chunk: Vec<ModelSpec> = candidates.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let verdicts: Vec<Verdict> =
            chunk.par_iter().map(|m| judge(test, &terms, m, &comp, family, signif)).collect();
        for (model, verdict) in chunk.into_iter().zip(verdicts) {
            counts.tested += 1;
            match verdict {
                Verdict::Keep(p) => kept.push((model, p)),
                Verdict::Reject => counts.rejected += 1,
                Verdict::Unfittable(reason) => *counts.unfittable.entry(reason).or_default() += 1,
            }
        }
    }

    let mut by_size: BTreeMap<usize, Vec<KeptModel>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (tested, p_value) in kept {
        let model = tested.closed();
        if seen.insert(model.clone()) {
            by_size.entry(model.size()).or_default().push(KeptModel { model, tested, p_value });
        }
    }
    counts.kept = by_size.values().map(Vec::len).sum();
    Ok(ConfidenceSet {
        by_size,
        signif,
        model_size,
        comprehensive: comprehensive.clone(),
        family,
        n_test: test.n(),
        counts,
    })
}

//! The exploratory phase: scan the retained variables for squared and
//! interaction terms, and let a decision source keep or discard each one.

mod decision;
mod plot;
mod scan;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::model::{ModelSpec, Term};
use crate::stats::Family;

pub use decision::{DecisionError, DecisionSource, KeepAll, KeepNone, ScriptedAnswer, ScriptedSource, TerminalSource};
pub use plot::{interaction_plot_data, plots_for, PlotData, PlotGroup, PlotPoint};
pub use scan::{interaction_scan, squared_term_scan};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    #[default]
    Pending,
    Keep,
    Discard,
}

/// A squared or interaction term whose coefficient looked significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermCandidate {
    /// Position in presentation order.
    pub id: usize,
    pub term: Term,
    pub p_value: f64,
    pub test_statistic: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExploratoryError {
    #[error("column {0} does not exist")]
    ColumnMissing(usize),
    #[error("need n > {needed} to fit the retained variables plus one term, have n = {n}")]
    SampleTooSmall { n: usize, needed: usize },
    #[error("family {family} does not match the response")]
    FamilyMismatch { family: Family },
    #[error("decision source closed after {} of {} decisions: {reason}", partial.decided(), partial.candidates.len())]
    DecisionSourceClosed { reason: String, partial: Box<ExploratoryOutcome> },
}

/// Candidates with their decisions, and the terms that were kept.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExploratoryOutcome {
    pub retained: Vec<usize>,
    pub candidates: Vec<TermCandidate>,
}

impl ExploratoryOutcome {
    pub fn new(retained: Vec<usize>, candidates: Vec<TermCandidate>) -> Self {
        Self { retained, candidates }
    }

    pub fn decided(&self) -> usize {
        self.candidates.iter().filter(|c| c.decision != Decision::Pending).count()
    }

    pub fn kept_terms(&self) -> Vec<Term> {
        self.candidates.iter().filter(|c| c.decision == Decision::Keep).map(|c| c.term).collect()
    }

    /// Retained main effects plus the kept squared and interaction terms.
    pub fn comprehensive(&self) -> ModelSpec {
        let mut m = ModelSpec::from_mains(self.retained.iter().copied());
        for t in self.kept_terms() {
            m.insert(t);
        }
        m
    }
}

/// Both scans, squared terms first, candidates numbered in presentation order.
pub fn scan_candidates(
    dataset: &Dataset,
    retained: &[usize],
    family: Family,
    signif: f64,
) -> Result<Vec<TermCandidate>, ExploratoryError> {
    let mut all = squared_term_scan(dataset, retained, family, signif)?;
    all.extend(interaction_scan(dataset, retained, family, signif)?);
    for (i, c) in all.iter_mut().enumerate() {
        c.id = i;
    }
    Ok(all)
}

/// Scan, then present every candidate once, with its plots, to `source`.
pub fn exploratory_phase(
    dataset: &Dataset,
    retained: &[usize],
    family: Family,
    signif: f64,
    source: &mut dyn DecisionSource,
) -> Result<ExploratoryOutcome, ExploratoryError> {
    let candidates = scan_candidates(dataset, retained, family, signif)?;
    let mut outcome = ExploratoryOutcome::new(retained.to_vec(), candidates);
    for i in 0..outcome.candidates.len() {
        let plots = plots_for(dataset, &outcome.candidates[i].term)?;
        match source.decide(&outcome.candidates[i], &plots, &dataset.names) {
            Ok(keep) => {
                outcome.candidates[i].decision = if keep { Decision::Keep } else { Decision::Discard };
                log::info!("{} {}", if keep { "kept" } else { "discarded" }, outcome.candidates[i].term.label(&dataset.names));
            }
            Err(e) => {
                return Err(ExploratoryError::DecisionSourceClosed { reason: e.to_string(), partial: Box::new(outcome) })
            }
        }
    }
    Ok(outcome)
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ConfidenceSet;
use crate::model::Term;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermFrequency {
    pub term: Term,
    pub count: usize,
    pub proportion: f64,
}

/// Every term of the comprehensive model (and any added by closure) with the
/// proportion of confidence-set models containing it, most frequent first,
/// ties in canonical term order.
pub fn variable_frequencies(cs: &ConfidenceSet) -> Vec<TermFrequency> {
    let mut terms: BTreeSet<Term> = cs.comprehensive.terms().into_iter().collect();
    terms.extend(cs.models().flat_map(|m| m.terms()));
    let total = cs.len();
    let mut out: Vec<TermFrequency> = terms
        .into_iter()
        .map(|term| {
            let count = cs.models().filter(|m| m.contains(&term)).count();
            let proportion = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            TermFrequency { term, count, proportion }
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    out
}

/// Proportion of models without term B (column) that contain term A (row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionTable {
    /// Row and column order, most frequent first.
    pub terms: Vec<Term>,
    /// `entries[a][b]`; `None` on the diagonal and where every model contains B.
    pub entries: Vec<Vec<Option<f64>>>,
}

impl SubstitutionTable {
    pub fn get(&self, a: &Term, b: &Term) -> Option<f64> {
        let i = self.terms.iter().position(|t| t == a)?;
        let j = self.terms.iter().position(|t| t == b)?;
        self.entries[i][j]
    }
}

/// `|M(A and not B)| / |M(not B)|` for every ordered pair of distinct terms.
pub fn substitution_table(cs: &ConfidenceSet) -> SubstitutionTable {
    let terms: Vec<Term> = variable_frequencies(cs).into_iter().map(|f| f.term).collect();
    let models: Vec<_> = cs.models().collect();
    let entries = terms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            terms
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    if i == j {
                        return None;
                    }
                    let without_b: Vec<_> = models.iter().filter(|m| !m.contains(b)).collect();
                    if without_b.is_empty() {
                        return None;
                    }
                    let with_a = without_b.iter().filter(|m| m.contains(a)).count();
                    Some(with_a as f64 / without_b.len() as f64)
                })
                .collect()
        })
        .collect();
    SubstitutionTable { terms, entries }
}

use rayon::prelude::*;

use super::{Decision, ExploratoryError, TermCandidate};
use crate::data::Dataset;
use crate::model::{terms_design, Term};
use crate::stats::{fit_family, Family};

fn check(dataset: &Dataset, retained: &[usize], family: Family) -> Result<(), ExploratoryError> {
    if !family.matches(&dataset.response) {
        return Err(ExploratoryError::FamilyMismatch { family });
    }
    if let Some(&bad) = retained.iter().find(|&&v| v >= dataset.d()) {
        return Err(ExploratoryError::ColumnMissing(bad));
    }
    let needed = retained.len() + 2;
    if dataset.n() <= needed {
        return Err(ExploratoryError::SampleTooSmall { n: dataset.n(), needed });
    }
    Ok(())
}

/// Fit all retained mains plus `extra`; returns the extra term's statistic
/// and p-value, or `None` (logged) when the fit fails.
fn test_extra(dataset: &Dataset, retained: &[usize], family: Family, extra: Term) -> Option<(f64, f64)> {
    let mut terms: Vec<Term> = retained.iter().map(|&v| Term::main(v)).collect();
    terms.push(extra);
    let design = terms_design(&terms, &dataset.x);
    match fit_family(family, &design, &dataset.response) {
        Ok(fit) => {
            let last = fit.p_values.len() - 1;
            Some((fit.test_statistics[last], fit.p_values[last]))
        }
        Err(e) => {
            log::warn!("scan fit with {} failed: {e}", extra.label(&dataset.names));
            None
        }
    }
}

fn scan(dataset: &Dataset, retained: &[usize], family: Family, signif: f64, terms: Vec<Term>) -> Vec<TermCandidate> {
    let mut found: Vec<TermCandidate> = terms
        .into_par_iter()
        .filter_map(|term| {
            let (stat, p) = test_extra(dataset, retained, family, term)?;
            (signif >= 1.0 || p < signif).then_some(TermCandidate {
                id: 0,
                term,
                p_value: p,
                test_statistic: stat,
                decision: Decision::Pending,
            })
        })
        .collect();
    found.sort_by(|a, b| a.p_value.total_cmp(&b.p_value).then_with(|| a.term.cmp(&b.term)));
    for (i, c) in found.iter_mut().enumerate() {
        c.id = i;
    }
    found
}

/// For each retained variable, add its square to the model of all retained
/// mains; report those whose squared term has p-value below `signif`, most
/// significant first.
pub fn squared_term_scan(
    dataset: &Dataset,
    retained: &[usize],
    family: Family,
    signif: f64,
) -> Result<Vec<TermCandidate>, ExploratoryError> {
    check(dataset, retained, family)?;
    let mut ids = retained.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let terms = ids.into_iter().map(Term::square).collect();
    Ok(scan(dataset, retained, family, signif, terms))
}

/// As [`squared_term_scan`], over the product of every pair of retained
/// variables.
pub fn interaction_scan(
    dataset: &Dataset,
    retained: &[usize],
    family: Family,
    signif: f64,
) -> Result<Vec<TermCandidate>, ExploratoryError> {
    check(dataset, retained, family)?;
    let mut ids = retained.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut terms = Vec::with_capacity(ids.len() * ids.len().saturating_sub(1) / 2);
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            terms.push(Term::interaction(a, b));
        }
    }
    Ok(scan(dataset, retained, family, signif, terms))
}

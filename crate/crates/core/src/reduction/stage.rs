use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{arrange_hypercube, DecisionRule, ReductionError};
use crate::data::Dataset;
use crate::stats::{fit_family, Family};

/// One regression over the variables of a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub vars: Vec<usize>,
    /// Aligned with `vars`; empty when the fit failed.
    pub p_values: Vec<f64>,
    pub statistics: Vec<f64>,
    /// Variables that met the rule in this line.
    pub successes: Vec<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableTally {
    pub appearances: usize,
    pub successes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub dim: usize,
    pub side: usize,
    pub seed: u64,
    pub rule: DecisionRule,
    pub n_candidates: usize,
    pub lines: Vec<LineRecord>,
    pub tallies: BTreeMap<usize, VariableTally>,
    /// Sorted ascending.
    pub retained: Vec<usize>,
}

impl StageRecord {
    pub fn failed_lines(&self) -> usize {
        self.lines.iter().filter(|l| l.error.is_some()).count()
    }
}

/// Order a line's variables from most to least significant: p-value
/// ascending, then larger |statistic|, then smaller index.
fn rank_order(vars: &[usize], p: &[f64], stat: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vars.len()).collect();
    idx.sort_by(|&a, &b| {
        p[a].total_cmp(&p[b])
            .then_with(|| stat[b].abs().total_cmp(&stat[a].abs()))
            .then_with(|| vars[a].cmp(&vars[b]))
    });
    idx
}

fn analyse_line(dataset: &Dataset, vars: Vec<usize>, rule: &DecisionRule, family: Family) -> LineRecord {
    let design = dataset.columns(&vars);
    match fit_family(family, &design, &dataset.response) {
        Ok(fit) => {
            let off = family.term_offset();
            let p = fit.p_values[off..].to_vec();
            let stat = fit.test_statistics[off..].to_vec();
            let successes = rank_order(&vars, &p, &stat)
                .into_iter()
                .enumerate()
                .filter(|&(r, i)| rule.succeeds(r + 1, p[i]))
                .map(|(_, i)| vars[i])
                .collect();
            LineRecord { vars, p_values: p, statistics: stat, successes, error: None }
        }
        Err(e) => {
            log::debug!("line fit failed over {:?}: {e}", vars);
            LineRecord { vars, p_values: Vec::new(), statistics: Vec::new(), successes: Vec::new(), error: Some(e.to_string()) }
        }
    }
}

/// One stage: arrange `candidates` in a `dim`-dimensional hypercube, fit every
/// line (singleton lines as simple regressions) and keep the variables that
/// succeed in at least `rule.min_appearances` lines. A failed line fit counts
/// as no success for its variables.
pub fn run_stage(
    dataset: &Dataset,
    candidates: &[usize],
    dim: usize,
    rule: &DecisionRule,
    family: Family,
    seed: u64,
) -> Result<StageRecord, ReductionError> {
    rule.validate(dim)?;
    let arrangement = arrange_hypercube(candidates, dim, seed)?;
    let lines = arrangement.fibers();
    let widest = lines.iter().map(Vec::len).max().unwrap_or(0);
    let needed = widest + family.term_offset() + 1;
    if dataset.n() < needed {
        return Err(ReductionError::SampleTooSmall { n: dataset.n(), needed });
    }

    let records: Vec<LineRecord> =
        lines.into_par_iter().map(|vars| analyse_line(dataset, vars, rule, family)).collect();

    let mut tallies: BTreeMap<usize, VariableTally> = candidates.iter().map(|&v| (v, VariableTally::default())).collect();
    for line in &records {
        for v in &line.vars {
            tallies.get_mut(v).expect("line variables are candidates").appearances += 1;
        }
        for v in &line.successes {
            tallies.get_mut(v).expect("line variables are candidates").successes += 1;
        }
    }
    let retained =
        tallies.iter().filter(|(_, t)| t.successes >= rule.min_appearances).map(|(&v, _)| v).collect();

    Ok(StageRecord {
        dim,
        side: arrangement.side,
        seed,
        rule: *rule,
        n_candidates: candidates.len(),
        lines: records,
        tallies,
        retained,
    })
}

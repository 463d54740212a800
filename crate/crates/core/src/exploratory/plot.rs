use serde::{Deserialize, Serialize};

use super::ExploratoryError;
use crate::data::{Dataset, Response};
use crate::model::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotGroup {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub group: PlotGroup,
    pub censored: bool,
}

/// Response against one variable, split into two groups at the median of a
/// second (conditioning) variable. One point per row, in row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub x_label: String,
    pub y_label: String,
    pub group_label: String,
    pub group_median: f64,
    /// Survival times are best viewed on a log scale.
    pub log_y: bool,
    pub points: Vec<PlotPoint>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Response (observed time for survival data) against `var_a`, grouped by
/// `var_b` at its median; rows at or below the median go to the low group.
pub fn interaction_plot_data(dataset: &Dataset, var_a: usize, var_b: usize) -> Result<PlotData, ExploratoryError> {
    for v in [var_a, var_b] {
        if v >= dataset.d() {
            return Err(ExploratoryError::ColumnMissing(v));
        }
    }
    let b = dataset.column(var_b);
    let med = if b.is_empty() { 0.0 } else { median(&b) };
    let points = (0..dataset.n())
        .map(|i| PlotPoint {
            x: dataset.x[(i, var_a)],
            y: dataset.response.plot_value(i),
            group: if b[i] <= med { PlotGroup::Low } else { PlotGroup::High },
            censored: dataset.response.is_censored(i),
        })
        .collect();
    let survival = matches!(dataset.response, Response::Survival { .. });
    Ok(PlotData {
        x_label: dataset.names[var_a].clone(),
        y_label: if survival { "time".into() } else { "response".into() },
        group_label: dataset.names[var_b].clone(),
        group_median: med,
        log_y: survival,
        points,
    })
}

/// The plots shown alongside a candidate: both conditioning directions for an
/// interaction, the variable against itself for a square.
pub fn plots_for(dataset: &Dataset, term: &Term) -> Result<Vec<PlotData>, ExploratoryError> {
    match *term {
        Term::Main { var } | Term::Square { var } => Ok(vec![interaction_plot_data(dataset, var, var)?]),
        Term::Interaction { a, b } => Ok(vec![interaction_plot_data(dataset, a, b)?, interaction_plot_data(dataset, b, a)?]),
    }
}

//! Datasets: a design matrix of candidate explanatory variables plus a response
//! of one of three kinds.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::stats::Family;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Response {
    Continuous { y: Vec<f64> },
    Binary { y: Vec<f64> },
    Survival { time: Vec<f64>, status: Vec<bool> },
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Continuous { y } | Response::Binary { y } => y.len(),
            Response::Survival { time, .. } => time.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value plotted against covariates: the response itself, or the observed
    /// time for survival data.
    pub fn plot_value(&self, row: usize) -> f64 {
        match self {
            Response::Continuous { y } | Response::Binary { y } => y[row],
            Response::Survival { time, .. } => time[row],
        }
    }

    pub fn is_censored(&self, row: usize) -> bool {
        match self {
            Response::Survival { status, .. } => !status[row],
            _ => false,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Response {
        let pick = |v: &Vec<f64>| rows.iter().map(|&r| v[r]).collect::<Vec<_>>();
        match self {
            Response::Continuous { y } => Response::Continuous { y: pick(y) },
            Response::Binary { y } => Response::Binary { y: pick(y) },
            Response::Survival { time, status } => Response::Survival {
                time: pick(time),
                status: rows.iter().map(|&r| status[r]).collect(),
            },
        }
    }

    /// The family a response of this kind is modelled with by default.
    pub fn default_family(&self) -> Family {
        match self {
            Response::Continuous { .. } => Family::Gaussian,
            Response::Binary { .. } => Family::Binomial,
            Response::Survival { .. } => Family::Cox(Default::default()),
        }
    }
}

/// A design of `n` rows by `d` candidate variables with a response per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub response: Response,
}

impl Dataset {
    pub fn new(names: Vec<String>, x: DMatrix<f64>, response: Response) -> Self {
        assert_eq!(names.len(), x.ncols(), "one name per column");
        assert_eq!(response.len(), x.nrows(), "one response per row");
        Self { names, x, response }
    }

    /// Default column names `x1..xd`.
    pub fn with_default_names(x: DMatrix<f64>, response: Response) -> Self {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::new(names, x, response)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn rows(&self, range: Range<usize>) -> Dataset {
        let rows: Vec<usize> = range.collect();
        self.select_rows(&rows)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let x = self.x.select_rows(rows.iter());
        Dataset {
            names: self.names.clone(),
            x,
            response: self.response.select_rows(rows),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.column(j).iter().copied().collect()
    }

    /// Design made of the given columns, in order.
    pub fn columns(&self, ids: &[usize]) -> DMatrix<f64> {
        self.x.select_columns(ids.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_subsets_keep_response_aligned() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let ds = Dataset::with_default_names(
            x,
            Response::Survival {
                time: vec![1.0, 2.0, 3.0],
                status: vec![true, false, true],
            },
        );
        let sub = ds.rows(1..3);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.x[(0, 1)], 4.0);
        assert!(sub.response.is_censored(0));
        assert_eq!(sub.response.plot_value(1), 3.0);
    }
}

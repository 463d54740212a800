//! Gaussian lasso by cyclic coordinate descent over a geometric path of
//! penalties, and the undertuning rule that picks the first solution with (at
//! least) a target number of variables.
//!
//! Columns are centred and scaled to unit variance (divisor `n`) before
//! fitting; the intercept is unpenalized. Penalties are on that standardized
//! scale, so `lambda_max = max_j |<z_j, y - ybar>| / n`. Coefficients are
//! reported on the original scale.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LassoError {
    #[error("need at least 2 observations, have {0}")]
    TooFewObservations(usize),
    #[error("{x_rows} design rows vs {y_len} responses")]
    DimensionMismatch { x_rows: usize, y_len: usize },
    #[error("response is constant")]
    ConstantResponse,
    #[error("every column has zero variance")]
    NoUsableColumns,
    #[error("path needs at least 1 lambda and a ratio in (0, 1], got {n_lambdas} and {ratio}")]
    InvalidPath { n_lambdas: usize, ratio: f64 },
    #[error("the path never reaches {target} nonzero coefficients (maximum {max})")]
    TargetUnreachable { target: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoOptions {
    pub n_lambdas: usize,
    pub lambda_min_ratio: f64,
    /// Coordinate descent stops once a full sweep moves no standardized
    /// coefficient by more than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self { n_lambdas: 100, lambda_min_ratio: 0.01, tolerance: 1e-12, max_sweeps: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    /// Strictly decreasing.
    pub lambdas: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// Nonzero coefficients per lambda as `(column, value)`, original scale.
    pub coefficients: Vec<Vec<(usize, f64)>>,
    pub nonzero_counts: Vec<usize>,
    /// Zero-variance columns left out of the fit (their coefficients are 0).
    pub dropped: Vec<usize>,
    /// Whether coordinate descent met the tolerance at each lambda.
    pub converged: Vec<bool>,
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Columns with nonzero coefficient at path index `k`.
    pub fn support(&self, k: usize) -> Vec<usize> {
        self.coefficients[k].iter().map(|&(j, _)| j).collect()
    }

    /// Long-format CSV: one row per nonzero coefficient (a row with an empty
    /// variable for lambdas with none).
    pub fn write_csv<W: Write>(&self, names: &[String], out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "lambda", "nonzero", "intercept", "variable", "coefficient"])?;
        for k in 0..self.len() {
            let head = [k.to_string(), self.lambdas[k].to_string(), self.nonzero_counts[k].to_string(), self.intercepts[k].to_string()];
            if self.coefficients[k].is_empty() {
                w.write_record(head.iter().cloned().chain([String::new(), String::new()]))?;
            }
            for &(j, b) in &self.coefficients[k] {
                w.write_record(head.iter().cloned().chain([names[j].clone(), b.to_string()]))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

struct Standardized {
    z: DMatrix<f64>,
    cols: Vec<usize>,
    means: Vec<f64>,
    scales: Vec<f64>,
}

fn standardize(x: &DMatrix<f64>) -> (Standardized, Vec<usize>) {
    let n = x.nrows() as f64;
    let mut cols = Vec::new();
    let mut dropped = Vec::new();
    let mut means = Vec::new();
    let mut scales = Vec::new();
    for j in 0..x.ncols() {
        let c = x.column(j);
        let mean = c.sum() / n;
        let sd = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd > 1e-12 * mean.abs().max(1.0) {
            cols.push(j);
            means.push(mean);
            scales.push(sd);
        } else {
            dropped.push(j);
        }
    }
    let z = DMatrix::from_fn(x.nrows(), cols.len(), |i, k| (x[(i, cols[k])] - means[k]) / scales[k]);
    (Standardized { z, cols, means, scales }, dropped)
}

/// One cyclic pass over `coords`; returns the largest coefficient change.
fn sweep(z: &DMatrix<f64>, beta: &mut [f64], resid: &mut [f64], coords: &[usize], lambda: f64) -> f64 {
    let n = z.nrows() as f64;
    let mut max_delta = 0.0f64;
    for &j in coords {
        let col = z.column(j);
        let grad = col.iter().zip(resid.iter()).map(|(a, b)| a * b).sum::<f64>() / n;
        let new = soft_threshold(beta[j] + grad, lambda);
        let delta = new - beta[j];
        if delta != 0.0 {
            for (r, zi) in resid.iter_mut().zip(col.iter()) {
                *r -= delta * zi;
            }
            beta[j] = new;
            max_delta = max_delta.max(delta.abs());
        }
    }
    max_delta
}

/// Lasso solutions along a geometric path from `lambda_max` down to
/// `lambda_max * lambda_min_ratio`, each warm-started from the previous one.
pub fn lasso_path(x: &DMatrix<f64>, y: &[f64], options: &LassoOptions) -> Result<LassoPath, LassoError> {
    let n = x.nrows();
    if n != y.len() {
        return Err(LassoError::DimensionMismatch { x_rows: n, y_len: y.len() });
    }
    if n < 2 {
        return Err(LassoError::TooFewObservations(n));
    }
    let ratio = options.lambda_min_ratio;
    if options.n_lambdas == 0 || !(ratio > 0.0 && ratio <= 1.0) {
        return Err(LassoError::InvalidPath { n_lambdas: options.n_lambdas, ratio });
    }
    let (std, dropped) = standardize(x);
    for j in &dropped {
        log::info!("lasso: column {j} has zero variance and is left out");
    }
    if std.cols.is_empty() {
        return Err(LassoError::NoUsableColumns);
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    let mut resid: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let p = std.cols.len();
    let lambda_max = (0..p)
        .map(|j| std.z.column(j).iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>().abs() / n as f64)
        .fold(0.0, f64::max);
    if lambda_max <= 0.0 {
        return Err(LassoError::ConstantResponse);
    }
    let lambdas: Vec<f64> = (0..options.n_lambdas)
        .map(|k| {
            if options.n_lambdas == 1 {
                lambda_max
            } else {
                lambda_max * ratio.powf(k as f64 / (options.n_lambdas - 1) as f64)
            }
        })
        .collect();

    let all: Vec<usize> = (0..p).collect();
    let mut beta = vec![0.0; p];
    let mut path = LassoPath {
        lambdas: Vec::with_capacity(lambdas.len()),
        intercepts: Vec::new(),
        coefficients: Vec::new(),
        nonzero_counts: Vec::new(),
        dropped,
        converged: Vec::new(),
    };
    for &lambda in &lambdas {
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < options.max_sweeps {
            sweeps += 1;
            if sweep(&std.z, &mut beta, &mut resid, &all, lambda) <= options.tolerance {
                converged = true;
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
            while sweeps < options.max_sweeps {
                sweeps += 1;
                if sweep(&std.z, &mut beta, &mut resid, &active, lambda) <= options.tolerance {
                    break;
                }
            }
        }
        if !converged {
            log::warn!("lasso: no convergence at lambda {lambda} after {sweeps} sweeps");
        }
        let coefs: Vec<(usize, f64)> =
            (0..p).filter(|&k| beta[k] != 0.0).map(|k| (std.cols[k], beta[k] / std.scales[k])).collect();
        let intercept = ybar - (0..p).map(|k| beta[k] / std.scales[k] * std.means[k]).sum::<f64>();
        path.lambdas.push(lambda);
        path.intercepts.push(intercept);
        path.nonzero_counts.push(coefs.len());
        path.coefficients.push(coefs);
        path.converged.push(converged);
    }
    Ok(path)
}

/// Path index chosen by the undertuning rule: the first (largest-lambda)
/// index whose count equals `target`, else the first whose count exceeds it.
/// Counts need not be monotone.
pub fn undertuned_index(counts: &[usize], target: usize) -> Option<usize> {
    counts.iter().position(|&c| c == target).or_else(|| counts.iter().position(|&c| c >= target))
}

/// Variables selected by the lasso undertuned to `target` variables.
pub fn undertuned_select(path: &LassoPath, target: usize) -> Result<Vec<usize>, LassoError> {
    undertuned_index(&path.nonzero_counts, target).map(|k| path.support(k)).ok_or(LassoError::TargetUnreachable {
        target,
        max: path.nonzero_counts.iter().copied().max().unwrap_or(0),
    })
}

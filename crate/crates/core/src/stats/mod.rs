//! Regression fitting for the three supported families, per-coefficient
//! significance tests, and likelihood-ratio tests between nested fits.

mod cox;
pub mod dist;
mod linalg;
mod logistic;
mod newton;
mod lrt;
mod ols;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Response;

pub use cox::{cox_partial_loglik, fit_cox};
pub use dist::{tail_probability, DistError, Distribution};
pub use logistic::fit_logistic;
pub use lrt::lrt_pvalue;
pub use ols::fit_least_squares;

/// Newton/IRLS stops once the gradient max-norm falls below this.
pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
/// Relative tolerance on the pivoted-QR diagonal below which a design is
/// declared rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMethod {
    #[default]
    Efron,
    Breslow,
}

/// Model family. Gaussian and binomial fits carry an intercept; Cox fits do
/// not (it is absorbed into the baseline hazard).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Family {
    Gaussian,
    Binomial,
    Cox(TieMethod),
}

impl Family {
    pub fn has_intercept(&self) -> bool {
        !matches!(self, Family::Cox(_))
    }

    /// Index of the first non-intercept coefficient in a [`FitResult`].
    pub fn term_offset(&self) -> usize {
        usize::from(self.has_intercept())
    }

    pub fn matches(&self, response: &Response) -> bool {
        matches!(
            (self, response),
            (Family::Gaussian, Response::Continuous { .. })
                | (Family::Binomial, Response::Binary { .. })
                | (Family::Cox(_), Response::Survival { .. })
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
            Family::Cox(TieMethod::Efron) => "cox",
            Family::Cox(TieMethod::Breslow) => "cox-breslow",
        })
    }
}

impl From<Family> for String {
    fn from(f: Family) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for Family {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "binomial" | "logistic" => Ok(Family::Binomial),
            "cox" | "cox-efron" | "survival" => Ok(Family::Cox(TieMethod::Efron)),
            "cox-breslow" => Ok(Family::Cox(TieMethod::Breslow)),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitError {
    #[error("design is rank deficient (rank {rank} of {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("need more observations than parameters (n = {n}, p = {p})")]
    TooFewObservations { n: usize, p: usize },
    #[error("response has no variation (all observations in one class)")]
    NoVariation,
    #[error("binary response must be coded 0/1")]
    InvalidBinaryResponse,
    #[error("data are separated: the likelihood has no finite maximum")]
    Separation,
    #[error("no events: partial likelihood is undefined")]
    NoEvents,
    #[error("survival times must be positive and finite")]
    InvalidTime,
    #[error("partial likelihood is monotone: a coefficient diverges")]
    MonotoneLikelihood,
    #[error("family {family} cannot model this response")]
    FamilyMismatch { family: Family },
    #[error("sub-model is not nested in the comprehensive model")]
    NotNested,
    #[error("no residual degrees of freedom (n = {n}, p = {p})")]
    InsufficientResidualDf { n: usize, p: usize },
    #[error(transparent)]
    Distribution(#[from] DistError),
}

/// Outcome of one regression fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// t statistics for Gaussian fits, Wald z statistics otherwise.
    pub test_statistics: Vec<f64>,
    /// Two-sided p-values.
    pub p_values: Vec<f64>,
    /// Residual sum of squares (Gaussian), maximized log-likelihood
    /// (binomial) or maximized partial log-likelihood (Cox).
    pub objective: f64,
    pub n_params: usize,
    pub converged: bool,
}

/// Fit `family` to `covariates` (no intercept column; one is added where the
/// family needs it).
pub fn fit_family(
    family: Family,
    covariates: &DMatrix<f64>,
    response: &Response,
) -> Result<FitResult, FitError> {
    if covariates.nrows() != response.len() {
        return Err(FitError::DimensionMismatch(format!(
            "{} design rows vs {} responses",
            covariates.nrows(),
            response.len()
        )));
    }
    match (family, response) {
        (Family::Gaussian, Response::Continuous { y }) => {
            fit_least_squares(&with_intercept(covariates), y)
        }
        (Family::Binomial, Response::Binary { y }) => fit_logistic(&with_intercept(covariates), y),
        (Family::Cox(ties), Response::Survival { time, status }) => {
            cox::fit_cox_with(covariates, time, status, ties)
        }
        (family, _) => Err(FitError::FamilyMismatch { family }),
    }
}

/// Prepend a column of ones.
pub fn with_intercept(covariates: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = covariates.shape();
    DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { covariates[(i, j - 1)] })
}

/// Fill standard errors, Wald statistics and two-sided p-values from
/// coefficients and the diagonal of their covariance matrix.
pub(crate) fn wald_summary(
    coefficients: &[f64],
    variances: &[f64],
    reference: Distribution,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), FitError> {
    let scale = coefficients.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let mut se = Vec::with_capacity(coefficients.len());
    let mut stats = Vec::with_capacity(coefficients.len());
    let mut pvals = Vec::with_capacity(coefficients.len());
    for (&b, &v) in coefficients.iter().zip(variances) {
        let s = v.max(0.0).sqrt();
        // Zero standard error (exact fit): nonzero coefficients are infinitely
        // significant, numerically-zero ones are not significant at all.
        let z = if s > 0.0 {
            b / s
        } else if b.abs() > 1e-10 * (1.0 + scale) {
            b.signum() * f64::INFINITY
        } else {
            0.0
        };
        se.push(s);
        stats.push(z);
        pvals.push(reference.two_sided(z)?);
    }
    Ok((se, stats, pvals))
}

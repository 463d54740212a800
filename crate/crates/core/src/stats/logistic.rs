use nalgebra::{DMatrix, DVector};

use super::linalg::{column_scales, require_full_rank, spd_inverse};
use super::newton::{maximize, Evaluation, NewtonFailure};
use super::{wald_summary, Distribution, FitError, FitResult};

fn softplus(x: f64) -> f64 {
    if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn evaluate(design: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> Evaluation {
    let eta = design * beta;
    let mut ll = 0.0;
    let mut resid = DVector::zeros(y.len());
    let mut weighted = design.clone();
    for i in 0..y.len() {
        let mu = sigmoid(eta[i]);
        ll += y[i] * eta[i] - softplus(eta[i]);
        resid[i] = y[i] - mu;
        let w = (mu * (1.0 - mu)).sqrt();
        weighted.row_mut(i).scale_mut(w);
    }
    let grad = design.tr_mul(&resid);
    let info = weighted.tr_mul(&weighted);
    (ll, grad, info)
}

/// Logistic regression by Newton iteration (equivalently IRLS). `design` must
/// already contain the intercept column and `y` must be coded 0/1. The
/// objective is the maximized Bernoulli log-likelihood.
pub fn fit_logistic(design: &DMatrix<f64>, y: &[f64]) -> Result<FitResult, FitError> {
    let (n, p) = design.shape();
    if y.len() != n {
        return Err(FitError::DimensionMismatch(format!("{n} design rows vs {} responses", y.len())));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(FitError::InvalidBinaryResponse);
    }
    if n <= p {
        return Err(FitError::TooFewObservations { n, p });
    }
    require_full_rank(design)?;
    let events = y.iter().filter(|&&v| v == 1.0).count();
    if events == 0 || events == n {
        return Err(FitError::NoVariation);
    }

    let yv = DVector::from_column_slice(y);
    let scales = column_scales(design);
    let outcome = maximize(p, &scales, |b| evaluate(design, &yv, b)).map_err(|e| match e {
        NewtonFailure::Diverged => FitError::Separation,
    })?;
    let cov = spd_inverse(&outcome.information).ok_or(FitError::Separation)?;

    let coefficients: Vec<f64> = outcome.beta.iter().copied().collect();
    let variances: Vec<f64> = (0..p).map(|j| cov[(j, j)]).collect();
    let (standard_errors, test_statistics, p_values) =
        wald_summary(&coefficients, &variances, Distribution::Normal)?;
    Ok(FitResult {
        coefficients,
        standard_errors,
        test_statistics,
        p_values,
        objective: outcome.loglik,
        n_params: p,
        converged: outcome.converged,
    })
}

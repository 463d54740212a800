//! Cox proportional hazards regression by partial likelihood.

use nalgebra::{DMatrix, DVector};

use super::linalg::{column_scales, require_full_rank, spd_inverse};
use super::newton::{maximize, Evaluation, NewtonFailure};
use super::{wald_summary, with_intercept, Distribution, FitError, FitResult, TieMethod};

/// Subjects sorted by decreasing time, grouped by tied times. Risk sets are
/// then prefix sums over the groups.
struct RiskOrder {
    groups: Vec<Vec<usize>>,
}

impl RiskOrder {
    fn new(time: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..time.len()).collect();
        order.sort_by(|&a, &b| time[b].total_cmp(&time[a]).then(a.cmp(&b)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in order {
            match groups.last_mut() {
                Some(g) if time[g[0]] == time[i] => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        Self { groups }
    }
}

fn evaluate(
    x: &DMatrix<f64>,
    status: &[bool],
    order: &RiskOrder,
    ties: TieMethod,
    beta: &DVector<f64>,
) -> Evaluation {
    let p = x.ncols();
    let eta = x * beta;
    let shift = eta.max();
    let w: Vec<f64> = eta.iter().map(|e| (e - shift).exp()).collect();

    let mut ll = 0.0;
    let mut grad = DVector::zeros(p);
    let mut info = DMatrix::zeros(p, p);
    let mut s0 = 0.0;
    let mut s1 = DVector::zeros(p);
    let mut s2 = DMatrix::zeros(p, p);
    let mut xi = DVector::zeros(p);

    for group in &order.groups {
        let mut d = 0usize;
        let mut d0 = 0.0;
        let mut d1 = DVector::zeros(p);
        let mut d2 = DMatrix::zeros(p, p);
        for &i in group {
            xi.copy_from(&x.row(i).transpose());
            let wi = w[i];
            s0 += wi;
            s1.axpy(wi, &xi, 1.0);
            s2.ger(wi, &xi, &xi, 1.0);
            if status[i] {
                d += 1;
                d0 += wi;
                d1.axpy(wi, &xi, 1.0);
                d2.ger(wi, &xi, &xi, 1.0);
                ll += eta[i];
                grad += &xi;
            }
        }
        for l in 0..d {
            let f = match ties {
                TieMethod::Efron => l as f64 / d as f64,
                TieMethod::Breslow => 0.0,
            };
            let a0 = s0 - f * d0;
            let a1 = &s1 - &d1 * f;
            let a2 = &s2 - &d2 * f;
            ll -= a0.ln() + shift;
            let mean = &a1 / a0;
            grad -= &mean;
            info += &a2 / a0;
            info.ger(-1.0, &mean, &mean, 1.0);
        }
    }
    (ll, grad, info)
}

fn validate(x: &DMatrix<f64>, time: &[f64], status: &[bool]) -> Result<(), FitError> {
    let (n, p) = x.shape();
    if time.len() != n || status.len() != n {
        return Err(FitError::DimensionMismatch(format!(
            "{n} design rows vs {} times and {} statuses",
            time.len(),
            status.len()
        )));
    }
    if time.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(FitError::InvalidTime);
    }
    if !status.iter().any(|&s| s) {
        return Err(FitError::NoEvents);
    }
    if n <= p {
        return Err(FitError::TooFewObservations { n, p });
    }
    Ok(())
}

/// Partial log-likelihood at a fixed coefficient vector.
pub fn cox_partial_loglik(
    x: &DMatrix<f64>,
    time: &[f64],
    status: &[bool],
    beta: &[f64],
    ties: TieMethod,
) -> Result<f64, FitError> {
    validate(x, time, status)?;
    if beta.len() != x.ncols() {
        return Err(FitError::DimensionMismatch(format!("{} coefficients for {} columns", beta.len(), x.ncols())));
    }
    let order = RiskOrder::new(time);
    Ok(evaluate(x, status, &order, ties, &DVector::from_column_slice(beta)).0)
}

/// Cox regression with Efron tie handling.
pub fn fit_cox(x: &DMatrix<f64>, time: &[f64], status: &[bool]) -> Result<FitResult, FitError> {
    fit_cox_with(x, time, status, TieMethod::Efron)
}

pub(crate) fn fit_cox_with(
    x: &DMatrix<f64>,
    time: &[f64],
    status: &[bool],
    ties: TieMethod,
) -> Result<FitResult, FitError> {
    validate(x, time, status)?;
    let p = x.ncols();
    // A covariate constant across subjects is confounded with the baseline
    // hazard, so rank is judged together with an implicit intercept.
    require_full_rank(&with_intercept(x))?;

    // Centering leaves coefficients and the partial likelihood unchanged but
    // keeps the exponentials well scaled.
    let mut centered = x.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let order = RiskOrder::new(time);
    let scales = column_scales(&centered);
    let outcome = maximize(p, &scales, |b| evaluate(&centered, status, &order, ties, b))
        .map_err(|e| match e {
            NewtonFailure::Diverged => FitError::MonotoneLikelihood,
        })?;
    let cov = spd_inverse(&outcome.information).ok_or(FitError::MonotoneLikelihood)?;

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

use nalgebra::{DMatrix, DVector};

use super::linalg::require_full_rank;
use super::{wald_summary, Distribution, FitError, FitResult};

/// Ordinary least squares. `design` must already contain the intercept
/// column. The objective is the residual sum of squares.
pub fn fit_least_squares(design: &DMatrix<f64>, y: &[f64]) -> Result<FitResult, FitError> {
    let (n, p) = design.shape();
    if y.len() != n {
        return Err(FitError::DimensionMismatch(format!("{n} design rows vs {} responses", y.len())));
    }
    if n <= p {
        return Err(FitError::TooFewObservations { n, p });
    }
    require_full_rank(design)?;

    let yv = DVector::from_column_slice(y);
    let qr = design.clone().qr();
    let r = qr.r();
    let qty = qr.q().tr_mul(&yv);
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(FitError::RankDeficient { rank: p - 1, cols: p })?;

    let resid = &yv - design * &beta;
    let rss = resid.norm_squared();
    let df = (n - p) as f64;
    let sigma2 = if rss <= 1e-30 * yv.norm_squared() { 0.0 } else { rss / df };

    // (X'X)^-1 = R^-1 R^-T, so var(beta_j) = sigma^2 * |row j of R^-1|^2.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(FitError::RankDeficient { rank: p - 1, cols: p })?;
    let variances: Vec<f64> = (0..p).map(|j| sigma2 * r_inv.row(j).norm_squared()).collect();

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let (standard_errors, test_statistics, p_values) =
        wald_summary(&coefficients, &variances, Distribution::StudentT { df })?;

    Ok(FitResult {
        coefficients,
        standard_errors,
        test_statistics,
        p_values,
        objective: rss,
        n_params: p,
        converged: true,
    })
}

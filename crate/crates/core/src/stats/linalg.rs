use nalgebra::{DMatrix, DVector};

use super::{FitError, RANK_TOL};

/// Numerical rank from the diagonal of a column-pivoted QR decomposition.
pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let r = m.clone().col_piv_qr().r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > RANK_TOL * largest).count()
}

pub(crate) fn require_full_rank(m: &DMatrix<f64>) -> Result<(), FitError> {
    let rank = numerical_rank(m);
    if rank < m.ncols() {
        Err(FitError::RankDeficient { rank, cols: m.ncols() })
    } else {
        Ok(())
    }
}

/// Inverse of a symmetric positive definite matrix, or `None` when the
/// Cholesky factorization fails.
pub(crate) fn spd_inverse(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    h.clone().cholesky().map(|c| c.inverse())
}

pub(crate) fn spd_solve(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    h.clone().cholesky().map(|c| c.solve(g))
}

/// Sample standard deviation of each column; used to express divergence
/// checks in units of the covariate's spread.
pub(crate) fn column_scales(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    x.column_iter()
        .map(|c| {
            let mean = c.sum() / n;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            // Intercept-like columns have zero spread; use their magnitude.
            if var > 0.0 { var.sqrt() } else { mean.abs().max(1.0) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_collinear_columns() {
        let m = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 2.0, 1.0, 1.0, 3.0, 1.0, 2.0, 4.0, 1.0, 3.0, 5.0]);
        assert_eq!(numerical_rank(&m), 2);
        assert!(matches!(require_full_rank(&m), Err(FitError::RankDeficient { rank: 2, cols: 3 })));
    }
}

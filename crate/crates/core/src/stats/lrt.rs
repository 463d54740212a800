use super::{Distribution, Family, FitError, FitResult};

/// p-value of the test of `sub` against the larger nested fit `comp` on the
/// same `n` observations.
///
/// Gaussian fits use the exact F test on residual sums of squares; the other
/// families refer twice the log-likelihood gain to a chi-squared distribution.
pub fn lrt_pvalue(sub: &FitResult, comp: &FitResult, family: Family, n: usize) -> Result<f64, FitError> {
    if sub.n_params >= comp.n_params {
        return Err(FitError::NotNested);
    }
    let extra = (comp.n_params - sub.n_params) as f64;
    match family {
        Family::Gaussian => {
            if n <= comp.n_params {
                return Err(FitError::InsufficientResidualDf { n, p: comp.n_params });
            }
            let df2 = (n - comp.n_params) as f64;
            let gain = (sub.objective - comp.objective).max(0.0);
            if gain == 0.0 {
                return Ok(1.0);
            }
            if comp.objective <= 0.0 {
                return Ok(0.0);
            }
            let f = (gain / extra) / (comp.objective / df2);
            Ok(Distribution::F { df1: extra, df2 }.sf(f)?)
        }
        Family::Binomial | Family::Cox(_) => {
            let stat = (2.0 * (comp.objective - sub.objective)).max(0.0);
            if stat == 0.0 {
                return Ok(1.0);
            }
            Ok(Distribution::ChiSquared { df: extra }.sf(stat)?)
        }
    }
}

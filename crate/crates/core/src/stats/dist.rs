//! Cumulative distribution functions for the reference distributions of the
//! per-coefficient and likelihood-ratio tests.
//!
//! Backed by `statrs`, whose Student-t and F distributions go through the
//! regularized incomplete beta function and whose chi-squared distribution goes
//! through the regularized incomplete gamma function.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal,
    StudentT { df: f64 },
    ChiSquared { df: f64 },
    F { df1: f64, df2: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DistError {
    #[error("degrees of freedom must be positive and finite, got {0}")]
    InvalidDf(f64),
    #[error("probability evaluated at NaN")]
    NotANumber,
}

fn check_df(df: f64) -> Result<(), DistError> {
    if df.is_finite() && df > 0.0 {
        Ok(())
    } else {
        Err(DistError::InvalidDf(df))
    }
}

impl Distribution {
    fn validate(&self) -> Result<(), DistError> {
        match *self {
            Distribution::Normal => Ok(()),
            Distribution::StudentT { df } | Distribution::ChiSquared { df } => check_df(df),
            Distribution::F { df1, df2 } => {
                check_df(df1)?;
                check_df(df2)
            }
        }
    }

    /// Lower cumulative probability `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64, DistError> {
        self.eval(x, false)
    }

    /// Upper tail `P(X > x)`, computed directly rather than as `1 - cdf` so
    /// that small tail areas keep their relative accuracy.
    pub fn sf(&self, x: f64) -> Result<f64, DistError> {
        self.eval(x, true)
    }

    fn eval(&self, x: f64, upper: bool) -> Result<f64, DistError> {
        self.validate()?;
        if x.is_nan() {
            return Err(DistError::NotANumber);
        }
        let lower_bound = match self {
            Distribution::Normal | Distribution::StudentT { .. } => f64::NEG_INFINITY,
            Distribution::ChiSquared { .. } | Distribution::F { .. } => 0.0,
        };
        if x <= lower_bound {
            return Ok(if upper { 1.0 } else { 0.0 });
        }
        if x == f64::INFINITY {
            return Ok(if upper { 0.0 } else { 1.0 });
        }
        // Parameters were validated above, so construction cannot fail.
        let p = match *self {
            Distribution::Normal => {
                let d = Normal::standard();
                if upper { d.sf(x) } else { d.cdf(x) }
            }
            Distribution::StudentT { df } => {
                let d = StudentsT::new(0.0, 1.0, df).expect("validated df");
                if upper { d.sf(x) } else { d.cdf(x) }
            }
            Distribution::ChiSquared { df } => {
                let d = ChiSquared::new(df).expect("validated df");
                if upper { d.sf(x) } else { d.cdf(x) }
            }
            Distribution::F { df1, df2 } => {
                let d = FisherSnedecor::new(df1, df2).expect("validated df");
                if upper { d.sf(x) } else { d.cdf(x) }
            }
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Two-sided p-value `P(|X| >= |stat|)` for a symmetric distribution.
    pub fn two_sided(&self, stat: f64) -> Result<f64, DistError> {
        if stat.is_nan() {
            return Ok(1.0);
        }
        Ok((2.0 * self.sf(stat.abs())?).min(1.0))
    }
}

/// Lower cumulative probability of `dist` at `x`.
pub fn tail_probability(dist: Distribution, x: f64) -> Result<f64, DistError> {
    dist.cdf(x)
}

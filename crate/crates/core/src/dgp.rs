//! Synthetic data: correlated Gaussian designs with a sparse set of signal
//! variables, and either a normal linear response or Weibull proportional
//! hazards survival times with exponential censoring.
//!
//! The `s` signal columns and `a` companion columns form one equicorrelated
//! block (correlation `rho`) placed at random column positions; every other
//! column is independent standard normal. Signal columns have variance
//! `var_signal`, companions `var_corr_noise`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Response};
use crate::rng::{purpose, substream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Gaussian,
    Survival,
}

/// How the signal and companion columns are correlated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStructure {
    /// One equicorrelated block holding signals and companions together.
    #[default]
    Joint,
    /// Signals equicorrelated among themselves, companions among
    /// themselves, the two groups independent.
    Separate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DgpConfig {
    pub d: usize,
    pub s: usize,
    pub a: usize,
    pub sig_strength: f64,
    pub rho: f64,
    pub block_structure: BlockStructure,
    pub n: usize,
    pub intercept: f64,
    pub noise_sd: f64,
    pub var_signal: f64,
    pub var_corr_noise: f64,
    pub response_kind: ResponseKind,
    pub tau: f64,
    pub kappa: f64,
    pub censor_rate: f64,
    pub seed: u64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            d: 1000,
            s: 5,
            a: 3,
            sig_strength: 1.0,
            rho: 0.9,
            block_structure: BlockStructure::Joint,
            n: 100,
            intercept: 5.0,
            noise_sd: 1.0,
            var_signal: 1.0,
            var_corr_noise: 1.0,
            response_kind: ResponseKind::Gaussian,
            tau: 1.0,
            kappa: 1.0,
            censor_rate: 0.0,
            seed: 2018,
        }
    }
}

impl DgpConfig {
    /// Weibull proportional hazards variant with exponential censoring.
    pub fn survival(n: usize, censor_rate: f64) -> Self {
        Self { n, response_kind: ResponseKind::Survival, censor_rate, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), DgpError> {
        let bad = |msg: String| Err(DgpError::InvalidConfig(msg));
        let block = self.s + self.a;
        if self.s == 0 {
            return bad("s must be at least 1".into());
        }
        if block > self.d {
            return bad(format!("s + a = {block} exceeds d = {}", self.d));
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        let widest = match self.block_structure {
            BlockStructure::Joint => block,
            BlockStructure::Separate => self.s.max(self.a),
        };
        let lower = if widest > 1 { -1.0 / (widest as f64 - 1.0) } else { -1.0 };
        if !(self.rho > lower && self.rho < 1.0) {
            return bad(format!("rho = {} does not give a positive definite block (needs {lower} < rho < 1)", self.rho));
        }
        for (name, v) in [
            ("noise_sd", self.noise_sd),
            ("var_signal", self.var_signal),
            ("var_corr_noise", self.var_corr_noise),
            ("tau", self.tau),
            ("kappa", self.kappa),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.censor_rate.is_finite() && self.censor_rate >= 0.0) {
            return bad(format!("censor_rate must be non-negative, got {}", self.censor_rate));
        }
        if !self.sig_strength.is_finite() || !self.intercept.is_finite() {
            return bad("sig_strength and intercept must be finite".into());
        }
        Ok(())
    }

    fn block_covariance(&self) -> DMatrix<f64> {
        let k = self.s + self.a;
        let var = |i: usize| if i < self.s { self.var_signal } else { self.var_corr_noise };
        let linked = |i: usize, j: usize| match self.block_structure {
            BlockStructure::Joint => true,
            BlockStructure::Separate => (i < self.s) == (j < self.s),
        };
        DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                var(i)
            } else if linked(i, j) {
                self.rho * (var(i) * var(j)).sqrt()
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DgpError {
    #[error("invalid data-generating configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub x: DMatrix<f64>,
    pub response: Response,
    /// Signal column indices (0-based, sorted).
    pub true_idx: Vec<usize>,
    /// Companion column indices (0-based, sorted).
    pub companion_idx: Vec<usize>,
    pub config: DgpConfig,
}

impl GeneratedData {
    pub fn to_dataset(&self) -> Dataset {
        Dataset::with_default_names(self.x.clone(), self.response.clone())
    }
}

/// Draw the design matrix. Returns `(X, signal indices, companion indices)`.
///
/// Draw order: the block positions (a uniform sample of `s + a` columns, the
/// first `s` drawn being the signals), then row by row `d` standard normals
/// in column order, the block entries being mixed through the Cholesky factor
/// of the block covariance.
pub fn generate_design(
    config: &DgpConfig,
    rng: &mut StreamRng,
) -> Result<(DMatrix<f64>, Vec<usize>, Vec<usize>), DgpError> {
    config.validate()?;
    let k = config.s + config.a;
    let block: Vec<usize> = rand::seq::index::sample(rng, config.d, k).into_vec();
    let chol = config
        .block_covariance()
        .cholesky()
        .ok_or_else(|| DgpError::InvalidConfig("block covariance is not positive definite".into()))?;
    let l = chol.l();

    let mut x = DMatrix::zeros(config.n, config.d);
    let mut z = vec![0.0; config.d];
    let mut zb = DVector::zeros(k);
    for i in 0..config.n {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        for j in 0..config.d {
            x[(i, j)] = z[j];
        }
        for (b, &col) in block.iter().enumerate() {
            zb[b] = z[col];
        }
        let mixed = &l * &zb;
        for (b, &col) in block.iter().enumerate() {
            x[(i, col)] = mixed[b];
        }
    }
    let mut signals = block[..config.s].to_vec();
    let mut companions = block[config.s..].to_vec();
    signals.sort_unstable();
    companions.sort_unstable();
    Ok((x, signals, companions))
}

fn linear_predictor(x: &DMatrix<f64>, true_idx: &[usize], strength: f64) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| true_idx.iter().map(|&j| strength * x[(i, j)]).sum())
        .collect()
}

/// `y = intercept + X beta + eps` with `beta = sig_strength` on the signals.
pub fn generate_gaussian_response(
    x: &DMatrix<f64>,
    true_idx: &[usize],
    config: &DgpConfig,
    rng: &mut StreamRng,
) -> Result<Vec<f64>, DgpError> {
    config.validate()?;
    let eta = linear_predictor(x, true_idx, config.sig_strength);
    Ok(eta
        .into_iter()
        .map(|e| {
            let eps: f64 = StandardNormal.sample(rng);
            config.intercept + e + config.noise_sd * eps
        })
        .collect())
}

/// Survival time by inversion of the Weibull proportional hazards survivor
/// function: `T = {-log U / (tau^kappa e^eta)}^(1/kappa)`.
pub fn survival_time(eta: f64, u: f64, tau: f64, kappa: f64) -> f64 {
    (-u.ln() / (tau.powf(kappa) * eta.exp())).powf(1.0 / kappa)
}

/// Event or censoring times with event indicators. Per row the uniform for
/// the event time is drawn first, then the censoring time (when censoring is
/// on).
pub fn generate_survival_response(
    x: &DMatrix<f64>,
    true_idx: &[usize],
    config: &DgpConfig,
    rng: &mut StreamRng,
) -> Result<(Vec<f64>, Vec<bool>), DgpError> {
    config.validate()?;
    let eta = linear_predictor(x, true_idx, config.sig_strength);
    let censor = if config.censor_rate > 0.0 {
        Some(Exp::new(config.censor_rate).map_err(|e| DgpError::InvalidConfig(e.to_string()))?)
    } else {
        None
    };
    let mut time = Vec::with_capacity(eta.len());
    let mut status = Vec::with_capacity(eta.len());
    for e in eta {
        let u: f64 = rng.sample(Open01);
        let t = survival_time(e, u, config.tau, config.kappa);
        let c = censor.map_or(f64::INFINITY, |d| d.sample(rng));
        if t <= c {
            time.push(t);
            status.push(true);
        } else {
            time.push(c);
            status.push(false);
        }
    }
    Ok((time, status))
}

/// Generate a full dataset from `config.seed`. Identical seeds give
/// bit-identical output.
pub fn dgp(config: &DgpConfig) -> Result<GeneratedData, DgpError> {
    let mut design_rng = substream(config.seed, &[purpose::DESIGN]);
    let mut response_rng = substream(config.seed, &[purpose::RESPONSE]);
    let (x, true_idx, companion_idx) = generate_design(config, &mut design_rng)?;
    let response = match config.response_kind {
        ResponseKind::Gaussian => Response::Continuous {
            y: generate_gaussian_response(&x, &true_idx, config, &mut response_rng)?,
        },
        ResponseKind::Survival => {
            let (time, status) = generate_survival_response(&x, &true_idx, config, &mut response_rng)?;
            Response::Survival { time, status }
        }
    };
    Ok(GeneratedData { x, response, true_idx, companion_idx, config: config.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_survival_time_is_shape_invariant() {
        let u = (-1.0f64).exp();
        assert!((survival_time(0.0, u, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((survival_time(0.0, u, 1.0, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn survival_time_decreases_in_linear_predictor() {
        let times: Vec<f64> = [-2.0, -0.5, 0.0, 1.0, 3.0].iter().map(|&e| survival_time(e, 0.3, 1.5, 2.0)).collect();
        assert!(times.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn config_validation() {
        assert!(DgpConfig::default().validate().is_ok());
        let too_many = DgpConfig { d: 7, ..DgpConfig::default() };
        assert!(too_many.validate().is_err());
        let not_pd = DgpConfig { rho: -0.2, ..DgpConfig::default() };
        assert!(not_pd.validate().is_err());
        let negative_rate = DgpConfig { censor_rate: -0.1, ..DgpConfig::default() };
        assert!(negative_rate.validate().is_err());
    }

    #[test]
    fn config_json_uses_field_names() {
        let cfg: DgpConfig = serde_json::from_str(r#"{"d": 50, "s": 2, "a": 1, "response_kind": "survival"}"#).unwrap();
        assert_eq!(cfg.d, 50);
        assert_eq!(cfg.response_kind, ResponseKind::Survival);
        assert_eq!(cfg.rho, 0.9);
    }
}

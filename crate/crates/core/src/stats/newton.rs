//! Safeguarded Newton ascent shared by the logistic and Cox fitters.

use nalgebra::{DMatrix, DVector};

use super::linalg::spd_solve;
use super::{GRADIENT_TOL, MAX_ITERATIONS};

/// Coefficients larger than this many covariate standard deviations on the
/// linear-predictor scale are treated as diverging.
const DIVERGENCE_CAP: f64 = 30.0;
/// A Newton step this large (in covariate-scaled units) at a point where the
/// gradient has already vanished means the maximum lies at infinity.
const RESIDUAL_STEP_TOL: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// Log-likelihood, gradient and observed information at a point.
pub(crate) type Evaluation = (f64, DVector<f64>, DMatrix<f64>);

pub(crate) struct NewtonOutcome {
    pub beta: DVector<f64>,
    pub loglik: f64,
    pub information: DMatrix<f64>,
    pub converged: bool,
}

pub(crate) enum NewtonFailure {
    /// The likelihood increases without bound along some direction.
    Diverged,
}

pub(crate) fn maximize<F>(p: usize, scales: &[f64], mut eval: F) -> Result<NewtonOutcome, NewtonFailure>
where
    F: FnMut(&DVector<f64>) -> Evaluation,
{
    let mut beta = DVector::zeros(p);
    let (mut ll, mut grad, mut info) = eval(&beta);
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        if grad.amax() < GRADIENT_TOL {
            converged = true;
            break;
        }
        let Some(step) = spd_solve(&info, &grad) else {
            return Err(NewtonFailure::Diverged);
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate = &beta + &step * t;
            let (ll_new, g_new, h_new) = eval(&candidate);
            if ll_new.is_finite() && ll_new >= ll - 1e-12 * (1.0 + ll.abs()) {
                accepted = Some((candidate, ll_new, g_new, h_new));
                break;
            }
            t *= 0.5;
        }
        let Some((b, l, g, h)) = accepted else {
            // No ascent possible: we are at the optimum up to rounding.
            converged = grad.amax() < GRADIENT_TOL.sqrt();
            break;
        };
        beta = b;
        ll = l;
        grad = g;
        info = h;
        if exceeds_cap(&beta, scales) {
            return Err(NewtonFailure::Diverged);
        }
    }

    if converged {
        match spd_solve(&info, &grad) {
            Some(step) if scaled_max(&step, scales) <= RESIDUAL_STEP_TOL => {}
            _ => return Err(NewtonFailure::Diverged),
        }
    } else if exceeds_cap(&beta, scales) {
        return Err(NewtonFailure::Diverged);
    }

    Ok(NewtonOutcome { beta, loglik: ll, information: info, converged })
}

fn scaled_max(v: &DVector<f64>, scales: &[f64]) -> f64 {
    v.iter().zip(scales).map(|(b, s)| (b * s).abs()).fold(0.0, f64::max)
}

fn exceeds_cap(beta: &DVector<f64>, scales: &[f64]) -> bool {
    scaled_max(beta, scales) > DIVERGENCE_CAP
}

use serde::Serialize;

use crate::dataset::Dataset;
use crate::fit::{fit_loglog, LogLogFit};
use crate::kick::{amplitude_oracle, GammaMode};
use crate::{Error, Result};

/// Target probability that a whole distributed attempt fails.
pub const ATTEMPT_FAILURE_TARGET: f64 = 0.5;

/// Largest processor count for which `budget_coeff/θ⁴` allows, at least 1.
pub fn eta_bound(theta: f64, budget_coeff: f64) -> Result<usize> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta {theta} not in (0, 1]")));
    }
    if budget_coeff.is_infinite() {
        return Ok(usize::MAX);
    }
    // Guard against exact quotients landing a hair below an integer.
    let raw = (budget_coeff / theta.powi(4) * (1.0 + 1e-12)).floor();
    Ok(if raw >= usize::MAX as f64 { usize::MAX } else { (raw as usize).max(1) })
}

/// Per-iteration failure probabilities over a θ sweep, with the constant
/// `c_f = max fail/θ⁴` and the log-log fit of failure against θ.
#[derive(Clone, Debug, Serialize)]
pub struct FailureCalibration {
    pub thetas: Vec<f64>,
    pub failures: Vec<f64>,
    pub constant: f64,
    /// `None` when every failure probability is zero.
    pub fit: Option<LogLogFit>,
}

pub fn calibrate_failure_constant(dataset: &Dataset, thetas: &[f64], mode: GammaMode) -> Result<FailureCalibration> {
    if thetas.is_empty() {
        return Err(Error::DegenerateSweep("no θ values".into()));
    }
    let failures = thetas
        .iter()
        .map(|t| amplitude_oracle(dataset, *t, mode).map(|o| o.failure_probability))
        .collect::<Result<Vec<_>>>()?;
    let constant = thetas
        .iter()
        .zip(&failures)
        .map(|(t, f)| f / t.powi(4))
        .fold(0.0, f64::max);
    let fit = if failures.iter().all(|f| *f > 0.0) && thetas.len() >= 2 {
        Some(fit_loglog(thetas, &failures)?)
    } else {
        None
    };
    Ok(FailureCalibration {
        thetas: thetas.to_vec(),
        failures,
        constant,
        fit,
    })
}

/// Coefficient for [`eta_bound`] such that `η` processors running `r`
/// iterations each fail a whole attempt with probability at most about
/// [`ATTEMPT_FAILURE_TARGET`].
///
/// Each all-zero test acts on branch 1 only, which carries weight ½, so an
/// attempt fails with probability at most `η·r·c_f·θ⁴/2`.
pub fn eta_budget_coeff(failure_constant: f64, r: u64) -> f64 {
    if failure_constant <= 0.0 {
        return f64::INFINITY;
    }
    2.0 * ATTEMPT_FAILURE_TARGET / (failure_constant * r.max(1) as f64)
}

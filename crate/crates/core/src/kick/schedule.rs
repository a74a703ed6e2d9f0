use serde::Serialize;

use crate::{Error, Result};

/// θ-reduction schedule: start at `theta0`, divide by `factor` until
/// `|μ_e| > threshold_coeff·θ²`, or until θ would fall below `theta_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleConfig {
    pub theta0: f64,
    pub factor: f64,
    pub threshold_coeff: f64,
    pub theta_floor: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            theta0: 0.5,
            factor: 1.5,
            threshold_coeff: 0.1,
            theta_floor: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleOutcome {
    pub theta: f64,
    pub mu_e: f64,
    /// Number of times θ was lowered.
    pub reductions: u32,
    pub thetas: Vec<f64>,
    pub estimates: Vec<f64>,
    /// True when the floor stopped the schedule before the threshold was cleared.
    pub reached_floor: bool,
}

pub fn theta_schedule<F>(config: &ScheduleConfig, mut estimator: F) -> Result<ScheduleOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(config.theta0 > 0.0 && config.theta0 <= 1.0)
        || !(config.factor > 1.0)
        || !(config.threshold_coeff > 0.0)
        || !(config.theta_floor > 0.0)
    {
        return Err(Error::InvalidParameter(format!("bad schedule {config:?}")));
    }
    let mut theta = config.theta0;
    let mut out = ScheduleOutcome {
        theta,
        mu_e: 0.0,
        reductions: 0,
        thetas: Vec::new(),
        estimates: Vec::new(),
        reached_floor: false,
    };
    loop {
        let mu_e = estimator(theta)?;
        out.thetas.push(theta);
        out.estimates.push(mu_e);
        out.theta = theta;
        out.mu_e = mu_e;
        if mu_e.abs() > config.threshold_coeff * theta * theta {
            return Ok(out);
        }
        let next = theta / config.factor;
        if next < config.theta_floor {
            out.reached_floor = true;
            return Ok(out);
        }
        theta = next;
        out.reductions += 1;
    }
}

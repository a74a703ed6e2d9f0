//! Serial mean estimation by phase kickback.
//!
//! One kick iteration, run on the data register while conditioned on an
//! ancilla being 1, is
//!
//! 1. Walsh-Hadamard on the data register (uniform superposition),
//! 2. rotate the phase of basis state `j` by `γ_j` with `sin γ_j = θ·v_j`,
//! 3. Walsh-Hadamard,
//! 4. rotate the phase of the all-zero state by π,
//! 5. Walsh-Hadamard,
//! 6. rotate by `γ_j` again (same sign as step 2),
//! 7. Walsh-Hadamard,
//!
//! followed by a measurement of whether the data register is all zero. On
//! success the register is back at `|0…0⟩` and the ancilla's 1-branch has picked
//! up a phase close to `π + 2⟨x⟩`; on failure the whole pipeline restarts.
//! After `r` iterations the ancilla is read out by interference.

mod estimate;
mod kernel;
mod oracle;
mod pipeline;
mod readout;
mod schedule;

pub use estimate::{
    estimate_mean_serial, ideal_mean_estimate, step_budget, ReadoutMode, STEP_BUDGET_C, UNWRAP_MARGIN,
};
pub(crate) use estimate::unwrap_signal;
pub use kernel::{kick_iteration, IterationTrace, KickKernel, KickVariant};
pub use oracle::{amplitude_oracle, AmplitudeOracle};
pub use pipeline::{Pipeline, PipelineRun};
pub use readout::{ideal_phase, readout_phase, readout_phase_with, Prepared, Readout, READOUT_HALF_WIDTH_C};
pub use schedule::{theta_schedule, ScheduleConfig, ScheduleOutcome};

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::{Error, Result};

/// How the per-value rotation angle is derived from `x = θ·v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMode {
    /// `γ = arcsin(x)`
    #[default]
    ExactArcsin,
    /// `γ = x`
    Linear,
}

/// Rotation angle for a scaled value.
pub fn gamma_of(x: f64, mode: GammaMode) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(match mode {
        GammaMode::ExactArcsin => x.asin(),
        GammaMode::Linear => x,
    })
}

/// Tuning of the serial estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickParams {
    /// Iterations per pipeline; `None` derives `max(1, ⌊κ/θ³⌋)`.
    pub r: Option<u64>,
    /// Readout samples, split evenly between the two offsets.
    pub alpha: u64,
    /// Phase budget for the derived `r`.
    pub kappa: f64,
    /// Restarts tolerated per prepared system before giving up.
    pub max_restarts: u64,
    pub gamma_mode: GammaMode,
}

impl Default for KickParams {
    fn default() -> Self {
        Self {
            r: None,
            alpha: 400,
            kappa: FRAC_PI_4,
            max_restarts: 10_000,
            gamma_mode: GammaMode::ExactArcsin,
        }
    }
}

impl KickParams {
    /// `r` in effect for `theta`.
    pub fn resolve_r(&self, theta: f64) -> u64 {
        self.r.unwrap_or_else(|| auto_r(theta, self.kappa, 1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == Some(0) {
            return Err(Error::InvalidParameter("r must be ≥ 1".into()));
        }
        if self.alpha < 1 {
            return Err(Error::InvalidParameter("alpha must be ≥ 1".into()));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParameter("kappa must be positive".into()));
        }
        Ok(())
    }
}

/// `max(1, ⌊κ/(η·θ³)⌋)`: the iteration count keeping the accumulated signal
/// phase of `eta` processors within `κ` when `|μ| ≤ θ²`.
pub fn auto_r(theta: f64, kappa: f64, eta: usize) -> u64 {
    let r = (kappa / (eta as f64 * theta.powi(3))).floor();
    if r.is_finite() && r >= 1.0 {
        r as u64
    } else {
        1
    }
}

/// Checks `0 < θ ≤ 1` and `θ·max|v| ≤ 1`.
pub fn check_theta(theta: f64, max_abs: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta {theta} not in (0, 1]")));
    }
    if theta * max_abs > 1.0 {
        return Err(Error::OutOfDomain(theta * max_abs));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_of(0.0, GammaMode::ExactArcsin).unwrap(), 0.0);
        assert!((gamma_of(1.0, GammaMode::ExactArcsin).unwrap() - FRAC_PI_2).abs() < 1e-15);
        // arcsin series x + x³/6 + 3x⁵/40 + 15x⁷/336
        let x: f64 = 0.1;
        let series = x + x.powi(3) / 6.0 + 3.0 * x.powi(5) / 40.0 + 15.0 * x.powi(7) / 336.0;
        assert!((gamma_of(x, GammaMode::ExactArcsin).unwrap() - series).abs() < 1e-10);
        assert!((series - 0.100_167).abs() < 1e-6);
        assert_eq!(gamma_of(0.3, GammaMode::Linear).unwrap(), 0.3);
        assert_eq!(gamma_of(1.2, GammaMode::ExactArcsin), Err(Error::OutOfDomain(1.2)));
    }

    #[test]
    fn derived_r() {
        assert_eq!(auto_r(0.1, FRAC_PI_4, 1), 785);
        assert_eq!(auto_r(1.0, FRAC_PI_4, 1), 1);
        assert_eq!(auto_r(0.1, FRAC_PI_4, 4), 196);
        assert_eq!(KickParams::default().resolve_r(0.5), 6);
    }
}

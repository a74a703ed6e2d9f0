use std::f64::consts::PI;

use super::{amplitude_oracle, ideal_phase, readout_phase, KickParams, Pipeline, Prepared};
use crate::dataset::Dataset;
use crate::qsim::wrap_angle;
use crate::report::{EstimateReport, Estimator, PhaseBranch};
use crate::{Error, RandomStream, Result};

/// Constant `C` of the step budget `C·N·log₂N·r·α`.
///
/// One iteration costs `4·log₂N + 2N + 1` gates, at most `4.5·N·log₂N` for
/// `N ≥ 2`; readout adds at most three gates per sample. `C = 8` leaves room
/// for a restart rate below roughly 40%.
pub const STEP_BUDGET_C: u64 = 8;

/// Distance from ±π beyond which the signal phase is considered wrapped.
pub const UNWRAP_MARGIN: f64 = 0.25;

/// How the ancilla phase is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReadoutMode {
    /// `α` prepared systems measured by interference.
    #[default]
    Sampled,
    /// A single prepared system whose phase is read exactly.
    Ideal,
}

/// `C·N·max(1, log₂N)·r·max(1, α)`.
pub fn step_budget(n: usize, r: u64, alpha: u64) -> u64 {
    let log2n = (n.trailing_zeros() as u64).max(1);
    STEP_BUDGET_C * n as u64 * log2n * r * alpha.max(1)
}

/// Signal phase after removing the deterministic π turns, checked against the unwrap window.
pub(crate) fn unwrap_signal(theta_hat: f64, pi_turns: u64) -> Result<f64> {
    let signal = wrap_angle(theta_hat - (pi_turns % 2) as f64 * PI);
    let limit = PI - UNWRAP_MARGIN;
    if signal.abs() > limit {
        return Err(Error::PhaseWindowExceeded {
            phase: signal,
            limit,
        });
    }
    Ok(signal)
}

/// Serial estimate `μ_e = Θ̂_signal / (2·r·θ)`.
pub fn estimate_mean_serial(
    dataset: &Dataset,
    theta: f64,
    params: &KickParams,
    rng: &RandomStream,
    mode: ReadoutMode,
) -> Result<EstimateReport> {
    let pipeline = Pipeline::new(dataset, theta, params)?;
    let r = pipeline.r();
    let (theta_hat, half_width, steps, restarts, alpha) = match mode {
        ReadoutMode::Ideal => {
            let run = pipeline.run(&mut rng.fork(0))?;
            (ideal_phase(&run.qubit), 0.0, run.elementary_steps, run.restarts, 0)
        }
        ReadoutMode::Sampled => {
            let readout = readout_phase(
                |_, trial_rng| {
                    let run = pipeline.run(trial_rng)?;
                    Ok(Prepared {
                        qubit: run.qubit,
                        elementary_steps: run.elementary_steps,
                        restarts: run.restarts,
                    })
                },
                params.alpha,
                rng,
            )?;
            (
                readout.theta_hat,
                readout.half_width,
                readout.elementary_steps,
                readout.restarts,
                params.alpha,
            )
        }
    };
    let signal = unwrap_signal(theta_hat, r)?;
    let scale = 2.0 * r as f64 * theta;
    Ok(EstimateReport {
        estimator: Estimator::Serial,
        mu_e: signal / scale,
        theta,
        r,
        alpha,
        eta: 1,
        restarts,
        elementary_step_count: steps,
        seed: rng.seed(),
        half_width: half_width / scale,
        theta_hat,
        pi_turns: r,
        phase_convention: PhaseBranch::Branch1,
        step_budget: step_budget(dataset.len(), r, alpha),
        ideal: mode == ReadoutMode::Ideal,
        theta_schedule: Vec::new(),
        reductions: None,
    })
}

/// Noise-free single-iteration estimate from the closed-form amplitudes:
/// `(arg(final_zero) − π) / (2θ)`. Usable at any θ since no `r` is involved.
pub fn ideal_mean_estimate(dataset: &Dataset, theta: f64, params: &KickParams) -> Result<f64> {
    let oracle = amplitude_oracle(dataset, theta, params.gamma_mode)?;
    Ok(wrap_angle(oracle.branch_phase() - PI) / (2.0 * theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: u64, alpha: u64) -> KickParams {
        KickParams {
            r: Some(r),
            alpha,
            ..KickParams::default()
        }
    }

    #[test]
    fn zero_dataset_estimates_zero() {
        let d = Dataset::new(vec![0.0; 8]).unwrap();
        let rep = estimate_mean_serial(&d, 0.2, &params(10, 200), &RandomStream::new(3), ReadoutMode::Sampled).unwrap();
        assert!(rep.mu_e.abs() <= rep.half_width, "{rep:?}");
        assert!(rep.within_step_budget());
    }

    #[test]
    fn uniform_dataset_ideal_bias_is_arcsin_inflation() {
        let (c, theta) = (0.5_f64, 0.1_f64);
        let d = Dataset::new(vec![c; 4]).unwrap();
        let rep = estimate_mean_serial(&d, theta, &params(20, 2), &RandomStream::new(1), ReadoutMode::Ideal).unwrap();
        let exact = (theta * c).asin() / theta;
        assert!((rep.mu_e - exact).abs() < 1e-12);
        // relative inflation bounded by the leading arcsin term (θc)²/6
        assert!((rep.mu_e - c) / c <= (theta * c).powi(2) / 6.0 * 1.01);
    }

    #[test]
    fn ideal_single_iteration_estimate() {
        let d = Dataset::new(vec![2e-8; 4]).unwrap();
        let mu = ideal_mean_estimate(&d, 3.38e-4, &KickParams::default()).unwrap();
        assert!((mu - 2e-8).abs() / 2e-8 < 1e-3, "{mu}");
    }

    #[test]
    fn window_check() {
        assert!(unwrap_signal(0.3, 4).is_ok());
        assert!(matches!(unwrap_signal(3.1, 2), Err(Error::PhaseWindowExceeded { .. })));
        assert!((unwrap_signal(PI - 0.2, 1).unwrap() + 0.2).abs() < 1e-12);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(step_budget(256, 200, 400), 8 * 256 * 8 * 200 * 400);
        assert_eq!(step_budget(1, 3, 0), 8 * 3);
    }
}

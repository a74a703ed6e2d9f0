//! θ and η sweeps behind the scaling-law checks.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::fit::{fit_loglog, LogLogFit};
use crate::kick::{amplitude_oracle, auto_r, gamma_of, ideal_phase, KickKernel, KickParams};
use crate::qsim::wrap_angle;
use crate::telecompute::{DistributedConfig, DistributedProtocol, NetworkTrace, Outcomes};
use crate::{par, Error, RandomStream, Result};

/// Errors at or below this are treated as exact zeros.
pub const EXACT_ZERO: f64 = 1e-12;

/// How the dataset's mean is set at each sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanPolicy {
    /// Shift the values so that `μ = θ²` at each θ.
    #[default]
    ThetaSquared,
    /// Use the dataset unchanged.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub mu: f64,
    /// `|Θ₁ − (π + 2⟨x⟩)|` for one iteration, from exact amplitudes.
    pub phase_error: f64,
    /// `|Θ₁ − (π + 2⟨γ⟩)|`: the part of the error left after the arcsin
    /// inflation, caused by the spread of the data. Zero for uniform data.
    pub refocusing_error: f64,
    /// Per-iteration probability of failing the all-zero test.
    pub failure_probability: f64,
    /// `r` at this θ with the default phase budget.
    pub r: u64,
    /// Elementary steps of one restart-free pipeline run.
    pub elementary_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaSweep {
    pub policy: MeanPolicy,
    pub rows: Vec<ThetaRow>,
    /// Fit of phase error against θ; `None` when the errors are exact zeros.
    pub phase_fit: Option<LogLogFit>,
    pub failure_fit: Option<LogLogFit>,
    pub refocusing_fit: Option<LogLogFit>,
    /// True when every refocusing error and failure probability is at numerical zero.
    pub exact: bool,
}

/// `values − mean + target`, checked against the value range.
pub fn with_mean(dataset: &Dataset, target: f64) -> Result<Dataset> {
    let shift = target - dataset.mean();
    Dataset::new(dataset.values().iter().map(|v| v + shift).collect())
}

fn fit_or_exact(thetas: &[f64], ys: &[f64]) -> Result<Option<LogLogFit>> {
    if ys.iter().all(|y| *y <= EXACT_ZERO) {
        return Ok(None);
    }
    if ys.iter().any(|y| *y <= 0.0) {
        return Err(Error::DegenerateSweep("some but not all sweep values are zero".into()));
    }
    fit_loglog(thetas, ys).map(Some)
}

/// Exact per-iteration phase error and failure probability at each θ.
pub fn theta_sweep(dataset: &Dataset, thetas: &[f64], policy: MeanPolicy, params: &KickParams) -> Result<ThetaSweep> {
    if thetas.len() < 3 {
        return Err(Error::DegenerateSweep(format!("need ≥ 3 θ values, got {}", thetas.len())));
    }
    let rows = par::map_indexed(thetas.len() as u64, |i| -> Result<ThetaRow> {
        let theta = thetas[i as usize];
        let d = match policy {
            MeanPolicy::ThetaSquared => with_mean(dataset, theta * theta)?,
            MeanPolicy::Fixed => dataset.clone(),
        };
        let oracle = amplitude_oracle(&d, theta, params.gamma_mode)?;
        let x_mean = theta * d.mean();
        let phase_error = wrap_angle(oracle.branch_phase() - PI - 2.0 * x_mean).abs();
        let gamma_mean = d
            .values()
            .iter()
            .map(|v| gamma_of(theta * v, params.gamma_mode))
            .sum::<Result<f64>>()?
            / d.len() as f64;
        let refocusing_error = wrap_angle(oracle.branch_phase() - PI - 2.0 * gamma_mean).abs();
        let r = params.r.unwrap_or_else(|| auto_r(theta, params.kappa, 1));
        let gates = 4 * d.num_sites() as u64 + 2 * d.len() as u64 + 1;
        Ok(ThetaRow {
            theta,
            mu: d.mean(),
            phase_error,
            refocusing_error,
            failure_probability: oracle.failure_probability,
            r,
            elementary_steps: 1 + r * gates,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ts: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.phase_error).collect();
    let fails: Vec<f64> = rows.iter().map(|r| r.failure_probability).collect();
    let refocus: Vec<f64> = rows.iter().map(|r| r.refocusing_error).collect();
    let phase_fit = fit_or_exact(&ts, &errs)?;
    let failure_fit = fit_or_exact(&ts, &fails)?;
    let refocusing_fit = fit_or_exact(&ts, &refocus)?;
    Ok(ThetaSweep {
        policy,
        exact: refocusing_fit.is_none() && failure_fit.is_none(),
        rows,
        phase_fit,
        failure_fit,
        refocusing_fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaRow {
    pub eta: usize,
    pub r: u64,
    /// Read-out phase of the base station's qubit.
    pub phase: f64,
    /// `|wrap(phase − η·Θ_serial)|` with `Θ_serial` the one-processor raw phase.
    pub multiplication_error: f64,
    pub elementary_steps: u64,
    /// `elementary_steps/η`: work done by each processor.
    pub steps_per_processor: f64,
    pub restarts: u64,
    pub messages: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaSweep {
    pub theta: f64,
    pub rows: Vec<EtaRow>,
}

/// Ideal-mode distributed runs with a common `r` at each η.
///
/// `r` defaults to the serial value at θ so that phases are comparable
/// across η; the processor bound is not applied.
pub fn eta_sweep(
    dataset: &Dataset,
    theta: f64,
    etas: &[usize],
    params: &KickParams,
    rng: &RandomStream,
) -> Result<EtaSweep> {
    if etas.len() < 3 {
        return Err(Error::DegenerateSweep(format!("need ≥ 3 η values, got {}", etas.len())));
    }
    let r = params.resolve_r(theta);
    let fixed = KickParams {
        r: Some(r),
        ..params.clone()
    };
    let serial_phase = r as f64 * KickKernel::new(dataset, theta, params.gamma_mode)?.branch_phase();
    let rows = par::map_indexed(etas.len() as u64, |i| -> Result<EtaRow> {
        let eta = etas[i as usize];
        let mut cfg = DistributedConfig::new(eta);
        cfg.force = true;
        let proto = DistributedProtocol::new(dataset, theta, &fixed, &cfg)?;
        let mut trace = NetworkTrace::default();
        let prep = proto.prepare(Outcomes::Sampled, None, &mut rng.fork(i), i, &mut trace)?;
        let phase = ideal_phase(&prep.qubit);
        Ok(EtaRow {
            eta,
            r,
            phase,
            multiplication_error: wrap_angle(phase - eta as f64 * serial_phase).abs(),
            elementary_steps: prep.elementary_steps,
            steps_per_processor: prep.elementary_steps as f64 / eta as f64,
            restarts: prep.restarts,
            messages: trace.messages().count(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(EtaSweep { theta, rows })
}

/// Default θ points for the scaling-law sweep.
pub const DEFAULT_THETAS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Generator;

    #[test]
    fn uniform_sweep_is_exact() {
        let d = Dataset::new(vec![0.3; 16]).unwrap();
        let s = theta_sweep(&d, &DEFAULT_THETAS, MeanPolicy::Fixed, &KickParams::default()).unwrap();
        assert!(s.exact);
        assert!(s.refocusing_fit.is_none() && s.failure_fit.is_none());
        for row in &s.rows {
            let inflation = 2.0 * ((row.theta * 0.3).asin() - row.theta * 0.3);
            assert!((row.phase_error - inflation).abs() < 1e-12);
        }
    }

    #[test]
    fn skewed_sweep_slopes() {
        let d = Generator::Skewed { mu: 0.0, n: 64 }.generate(&mut RandomStream::new(1)).unwrap();
        let s = theta_sweep(&d, &DEFAULT_THETAS, MeanPolicy::ThetaSquared, &KickParams::default()).unwrap();
        for row in &s.rows {
            assert!((row.mu - row.theta * row.theta).abs() < 1e-12);
        }
        assert!(s.phase_fit.unwrap().slope >= 2.5, "{s:?}");
        assert!(s.failure_fit.unwrap().slope >= 3.5, "{s:?}");
    }

    #[test]
    fn too_few_points() {
        let d = Dataset::new(vec![0.3; 4]).unwrap();
        assert!(theta_sweep(&d, &[0.1, 0.2], MeanPolicy::Fixed, &KickParams::default()).is_err());
    }

    #[test]
    fn eta_multiplies_phase() {
        let d = Dataset::new(vec![0.25; 8]).unwrap();
        let p = KickParams { r: Some(4), ..KickParams::default() };
        let s = eta_sweep(&d, 0.2, &[1, 2, 4], &p, &RandomStream::new(3)).unwrap();
        for row in &s.rows {
            assert!(row.multiplication_error < 1e-9, "{row:?}");
            assert_eq!(row.messages, row.eta - 1);
        }
    }
}

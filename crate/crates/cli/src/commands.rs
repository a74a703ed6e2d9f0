use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use qmean::baseline::{classical_mean_estimate, repeated_estimate, SamplingMode};
use qmean::dataset::{Dataset, Generator};
use qmean::kick::{
    amplitude_oracle, estimate_mean_serial, ideal_mean_estimate, kick_iteration, step_budget, theta_schedule,
    GammaMode, KickKernel, KickParams, KickVariant, Pipeline, ReadoutMode, ScheduleConfig,
};
use qmean::qsim::{wrap_angle, StateVector};
use qmean::report::EstimateReport;
use qmean::sweep::{eta_sweep, theta_sweep, MeanPolicy};
use qmean::telecompute::{
    cnot_doubling_ladder, run_distributed_estimator, run_epr_mean_protocol, DistributedConfig, NetworkTrace,
    ProtocolConfig,
};
use qmean::{Error, RandomStream};
use serde::Serialize;

use crate::args::{
    BaselineArgs, DataArgs, DistributedArgs, EprArgs, KickArgs, LadderArgs, OracleArgs, SerialArgs, SweepArgs,
};
use crate::output::emit;

/// Stream index reserved for dataset generation, away from the trial indices.
const GENERATOR_STREAM: u64 = u64::MAX;

/// Largest dataset the oracle check traces.
const ORACLE_MAX_N: usize = 256;

/// Deviation above which the oracle check fails.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Whether a command's own check passed; errors are reported separately.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    CheckFailed,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameter(msg.into()).into()
}

fn load_dataset(args: &DataArgs, seed: u64) -> Result<Dataset> {
    let values = match (&args.data, &args.gen) {
        (Some(path), _) => read_values(path)?,
        (None, Some(spec)) => {
            let gen: Generator = spec.parse()?;
            let rng = &mut RandomStream::new(seed).fork(GENERATOR_STREAM);
            return Ok(gen.generate(rng)?);
        }
        (None, None) => return Err(invalid("one of --data or --gen is required")),
    };
    if args.truncate {
        let (dataset, dropped) = Dataset::truncated(values)?;
        if dropped > 0 {
            eprintln!("qmean: warning: dropped {dropped} trailing values to reach length {}", dataset.len());
        }
        Ok(dataset)
    } else {
        Ok(Dataset::new(values)?)
    }
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        Ok(Dataset::parse_json(&text)?)
    } else {
        Ok(Dataset::parse_csv(&text)?)
    }
}

fn kick_params(k: &KickArgs) -> Result<KickParams> {
    let params = KickParams {
        r: k.r,
        alpha: k.alpha,
        max_restarts: k.max_restarts,
        gamma_mode: gamma_mode(k.linear_gamma),
        ..KickParams::default()
    };
    params.validate()?;
    Ok(params)
}

fn gamma_mode(linear: bool) -> GammaMode {
    if linear {
        GammaMode::Linear
    } else {
        GammaMode::ExactArcsin
    }
}

fn readout_mode(ideal: bool) -> ReadoutMode {
    if ideal {
        ReadoutMode::Ideal
    } else {
        ReadoutMode::Sampled
    }
}

fn write_trace(path: Option<&Path>, trace: &NetworkTrace) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, trace.to_json_lines()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn estimate_serial(a: &SerialArgs) -> Result<Status> {
    let dataset = load_dataset(&a.data, a.seed)?;
    let params = kick_params(&a.kick)?;
    let rng = RandomStream::new(a.seed);
    let report = if a.schedule {
        let config = ScheduleConfig {
            theta0: a.theta0,
            factor: a.factor,
            threshold_coeff: a.threshold,
            theta_floor: a.theta_floor,
        };
        if a.ideal {
            ideal_schedule(&dataset, &config, &params, a.seed)?
        } else {
            sampled_schedule(&dataset, &config, &params, &rng)?
        }
    } else {
        let theta = a.theta.ok_or_else(|| invalid("--theta is required"))?;
        estimate_mean_serial(&dataset, theta, &params, &rng, readout_mode(a.ideal))?
    };
    emit(&a.output, &report, None)?;
    Ok(Status::Passed)
}

/// Schedule driven by the closed-form single-iteration estimate.
fn ideal_schedule(dataset: &Dataset, config: &ScheduleConfig, params: &KickParams, seed: u64) -> Result<EstimateReport> {
    let mut steps = 0;
    let outcome = theta_schedule(config, |theta| {
        steps += 1 + KickKernel::new(dataset, theta, params.gamma_mode)?.gate_count();
        ideal_mean_estimate(dataset, theta, params)
    })?;
    let runs = outcome.thetas.len() as u64;
    Ok(EstimateReport {
        estimator: qmean::report::Estimator::Serial,
        mu_e: outcome.mu_e,
        theta: outcome.theta,
        r: 1,
        alpha: 0,
        eta: 1,
        restarts: 0,
        elementary_step_count: steps,
        seed,
        half_width: 0.0,
        theta_hat: wrap_angle(std::f64::consts::PI + 2.0 * outcome.theta * outcome.mu_e),
        pi_turns: 1,
        phase_convention: qmean::report::PhaseBranch::Branch1,
        step_budget: step_budget(dataset.len(), runs, 0),
        ideal: true,
        theta_schedule: outcome.thetas,
        reductions: Some(outcome.reductions),
    })
}

/// Schedule with a full sampled estimate at each θ, trial streams forked per step.
fn sampled_schedule(
    dataset: &Dataset,
    config: &ScheduleConfig,
    params: &KickParams,
    rng: &RandomStream,
) -> Result<EstimateReport> {
    let mut runs: Vec<EstimateReport> = Vec::new();
    let outcome = theta_schedule(config, |theta| {
        let rep = estimate_mean_serial(dataset, theta, params, &rng.fork(runs.len() as u64), ReadoutMode::Sampled)?;
        let mu_e = rep.mu_e;
        runs.push(rep);
        Ok(mu_e)
    })?;
    let mut report = runs.last().cloned().expect("the schedule runs at least once");
    report.restarts = runs.iter().map(|r| r.restarts).sum();
    report.elementary_step_count = runs.iter().map(|r| r.elementary_step_count).sum();
    report.step_budget = runs.iter().map(|r| r.step_budget).sum();
    report.seed = rng.seed();
    report.theta_schedule = outcome.thetas;
    report.reductions = Some(outcome.reductions);
    Ok(report)
}

pub fn estimate_epr(a: &EprArgs) -> Result<Status> {
    let dataset = load_dataset(&a.data, a.seed)?;
    let rng = RandomStream::new(a.seed);
    let (report, trace) = run_epr_mean_protocol(&dataset, a.theta, a.alpha, &rng, readout_mode(a.ideal))?;
    write_trace(a.trace.as_deref(), &trace)?;
    emit(&a.output, &report, None)?;
    Ok(Status::Passed)
}

pub fn estimate_distributed(a: &DistributedArgs) -> Result<Status> {
    let config = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ProtocolConfig>(&text)
                .map_err(|e| invalid(format!("protocol config {}: {e}", path.display())))?
        }
        None => ProtocolConfig {
            theta: a.theta.ok_or_else(|| invalid("--theta is required"))?,
            eta: a.eta,
            r: a.kick.r,
            alpha: a.kick.alpha,
            seeds: vec![a.seed],
            force: a.force,
            shard: a.shard,
        },
    };
    let seeds = if config.seeds.is_empty() { vec![a.seed] } else { config.seeds.clone() };
    let dataset = load_dataset(&a.data, seeds[0])?;
    let params = kick_params(&KickArgs {
        r: config.r,
        alpha: config.alpha,
        ..a.kick.clone()
    })?;
    let dist = DistributedConfig {
        eta: config.eta,
        shard: config.shard,
        force: config.force,
        budget_coeff: None,
    };
    let mut reports = Vec::with_capacity(seeds.len());
    let mut trace = NetworkTrace::default();
    for seed in &seeds {
        let rng = RandomStream::new(*seed);
        let (report, t) = run_distributed_estimator(&dataset, config.theta, &dist, &params, &rng, readout_mode(a.ideal))?;
        reports.push(report);
        trace.extend(t);
    }
    write_trace(a.trace.as_deref(), &trace)?;
    if reports.len() == 1 {
        emit(&a.output, &reports[0], None)?;
    } else {
        emit(&a.output, &reports, None)?;
    }
    Ok(Status::Passed)
}

pub fn sweep(a: &SweepArgs) -> Result<Status> {
    let dataset = load_dataset(&a.data, a.seed)?;
    let params = kick_params(&a.kick)?;
    if a.etas.is_empty() {
        let policy = if a.fixed_mean { MeanPolicy::Fixed } else { MeanPolicy::ThetaSquared };
        let table = theta_sweep(&dataset, &a.thetas, policy, &params)?;
        emit(&a.output, &table, Some("rows"))?;
    } else {
        let table = eta_sweep(&dataset, a.theta, &a.etas, &params, &RandomStream::new(a.seed))?;
        emit(&a.output, &table, Some("rows"))?;
    }
    Ok(Status::Passed)
}

#[derive(Debug, Serialize)]
pub struct OracleCheck {
    pub n: usize,
    pub theta: f64,
    pub r: u64,
    pub seed: u64,
    pub tolerance: f64,
    /// Largest `|a_j|` deviation between the traced run and the closed form.
    pub a_max_deviation: f64,
    pub w0_deviation: f64,
    pub final_zero_deviation: f64,
    pub failure_deviation: f64,
    /// Largest amplitude deviation of the dense against the branch-pair pipeline qubit.
    pub pipeline_deviation: f64,
    pub pipeline_restarts_match: bool,
    pub passed: bool,
}

pub fn oracle_check(a: &OracleArgs) -> Result<Status> {
    let dataset = load_dataset(&a.data, a.seed)?;
    if dataset.len() > ORACLE_MAX_N {
        return Err(invalid(format!("oracle check traces at most {ORACLE_MAX_N} values, got {}", dataset.len())));
    }
    let mode = gamma_mode(a.linear_gamma);
    let variant = KickVariant {
        flip_second_rotation: a.corrupt_gamma_sign,
    };
    let kernel = KickKernel::with_variant(&dataset, a.theta, mode, variant)?;
    let oracle = amplitude_oracle(&dataset, a.theta, mode)?;

    let n_sites = dataset.num_sites();
    let data: Vec<usize> = (1..=n_sites).collect();
    let mut state = StateVector::zero(n_sites + 1)?;
    state.apply_m(0)?;
    let trace = kick_iteration(&mut state, 0, &data, &kernel, true)?.expect("tracing was requested");
    let a_max_deviation = trace.a().iter().zip(&oracle.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let w0_deviation = (trace.w()[0] - oracle.w0).norm();
    let final_zero_deviation = (trace.final_zero() - oracle.final_zero).norm();
    let failure_deviation = ((1.0 - trace.success_probability) - oracle.failure_probability).abs();

    let params = KickParams {
        r: Some(a.r),
        gamma_mode: mode,
        ..KickParams::default()
    };
    let pipeline = Pipeline::with_variant(&dataset, a.theta, &params, variant)?;
    let branch = pipeline.run(&mut RandomStream::new(a.seed))?;
    let dense = pipeline.run_dense(&mut RandomStream::new(a.seed))?;
    let pipeline_deviation = branch.qubit.max_abs_diff(&dense.qubit);
    let pipeline_restarts_match = branch.restarts == dense.restarts;

    let passed = [a_max_deviation, w0_deviation, final_zero_deviation, failure_deviation, pipeline_deviation]
        .iter()
        .all(|d| *d <= ORACLE_TOLERANCE)
        && pipeline_restarts_match;
    let report = OracleCheck {
        n: dataset.len(),
        theta: a.theta,
        r: a.r,
        seed: a.seed,
        tolerance: ORACLE_TOLERANCE,
        a_max_deviation,
        w0_deviation,
        final_zero_deviation,
        failure_deviation,
        pipeline_deviation,
        pipeline_restarts_match,
        passed,
    };
    emit(&a.output, &report, None)?;
    Ok(if passed { Status::Passed } else { Status::CheckFailed })
}

pub fn baseline(a: &BaselineArgs) -> Result<Status> {
    let dataset = load_dataset(&a.data, a.seed)?;
    let report = if a.exhaustive {
        classical_mean_estimate(&dataset, a.samples, SamplingMode::Exhaustive, &mut RandomStream::new(a.seed))?
    } else if a.repeats == 1 {
        classical_mean_estimate(&dataset, a.samples, SamplingMode::WithReplacement, &mut RandomStream::new(a.seed))?
    } else {
        repeated_estimate(&dataset, a.samples, a.repeats, &RandomStream::new(a.seed))?.0
    };
    emit(&a.output, &report, None)?;
    Ok(Status::Passed)
}

pub fn ladder(a: &LadderArgs) -> Result<Status> {
    let phases = match (a.copies, a.phase) {
        (Some(k), Some(phi)) => vec![phi; k],
        _ => a.phases.clone(),
    };
    let report = cnot_doubling_ladder(&phases, a.levels, &mut RandomStream::new(a.seed))?;
    emit(&a.output, &report, Some("levels"))?;
    Ok(Status::Passed)
}

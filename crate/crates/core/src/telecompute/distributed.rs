use super::bound::{calibrate_failure_constant, eta_bound, eta_budget_coeff};
use super::{collapse_to_base, NetworkTrace, Outcomes, ProcessorNode, TraceEvent};
use crate::branch::BranchPairState;
use crate::dataset::Dataset;
use crate::kick::{
    auto_r, ideal_phase, readout_phase_with, step_budget, unwrap_signal, KickKernel, KickParams, Prepared,
    ReadoutMode,
};
use crate::report::{EstimateReport, Estimator, PhaseBranch};
use crate::{Error, RandomStream, Result};

/// θ values over which the failure constant is calibrated, besides the run's own θ.
pub const CALIBRATION_THETAS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

#[derive(Clone, Debug, PartialEq)]
pub struct DistributedConfig {
    pub eta: usize,
    /// Processor `j` sees shard `j` of `eta` instead of the whole dataset.
    pub shard: bool,
    /// Skips the processor-count bound.
    pub force: bool,
    /// Overrides the calibrated coefficient of the processor-count bound.
    pub budget_coeff: Option<f64>,
}

impl DistributedConfig {
    pub fn new(eta: usize) -> Self {
        Self {
            eta,
            shard: false,
            force: false,
            budget_coeff: None,
        }
    }
}

/// `η` processors, each running the kick pipeline on its own cat slot.
#[derive(Clone, Debug)]
pub struct DistributedProtocol {
    nodes: Vec<ProcessorNode>,
    kernels: Vec<KickKernel>,
    theta: f64,
    r: u64,
    max_restarts: u64,
    bound: usize,
}

impl DistributedProtocol {
    pub fn new(dataset: &Dataset, theta: f64, params: &KickParams, config: &DistributedConfig) -> Result<Self> {
        params.validate()?;
        let eta = config.eta;
        if eta == 0 {
            return Err(Error::EmptyCat);
        }
        let r = params.r.unwrap_or_else(|| auto_r(theta, params.kappa, eta));
        let views: Vec<Dataset> = if config.shard {
            (0..eta).map(|j| dataset.shard(j, eta)).collect::<Result<_>>()?
        } else {
            vec![dataset.clone(); eta]
        };
        let kernels: Vec<KickKernel> = if config.shard {
            views
                .iter()
                .map(|v| KickKernel::new(v, theta, params.gamma_mode))
                .collect::<Result<_>>()?
        } else {
            vec![KickKernel::new(dataset, theta, params.gamma_mode)?; eta]
        };
        let coeff = match config.budget_coeff {
            Some(c) => c,
            None => {
                let mut thetas = CALIBRATION_THETAS.to_vec();
                thetas.push(theta);
                let constant = views
                    .iter()
                    .take(if config.shard { eta } else { 1 })
                    .map(|v| calibrate_failure_constant(v, &thetas, params.gamma_mode).map(|c| c.constant))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                eta_budget_coeff(constant, r)
            }
        };
        let bound = eta_bound(theta, coeff)?;
        if eta > bound && !config.force {
            return Err(Error::EtaBoundExceeded { eta, bound });
        }
        let nodes = views
            .into_iter()
            .enumerate()
            .map(|(id, view)| ProcessorNode {
                id,
                view,
                slot: id,
                theta,
                r,
            })
            .collect();
        Ok(Self {
            nodes,
            kernels,
            theta,
            r,
            max_restarts: params.max_restarts,
            bound,
        })
    }

    pub fn eta(&self) -> usize {
        self.nodes.len()
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Processor-count bound in force for this configuration.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn nodes(&self) -> &[ProcessorNode] {
        &self.nodes
    }

    pub fn kernels(&self) -> &[KickKernel] {
        &self.kernels
    }

    /// Deterministic π turns in the final phase: `η·r`.
    pub fn pi_turns(&self) -> u64 {
        self.eta() as u64 * self.r
    }

    /// Runs all kick iterations until every processor passes every all-zero
    /// test, restarting globally on any failure. Returns the state before the
    /// cat bits are measured, with the steps and restarts spent.
    pub fn accumulate(
        &self,
        rng: &mut RandomStream,
        round: u64,
        trace: &mut NetworkTrace,
    ) -> Result<(BranchPairState, u64, u64)> {
        let eta = self.eta();
        let mut restarts = 0;
        let mut steps = 0;
        'attempt: loop {
            let mut state = BranchPairState::new_cat(eta)?;
            // M and η−1 CNOTs
            steps += eta as u64;
            for (node, kernel) in self.nodes.iter().zip(&self.kernels) {
                state.attach_local_register(node.slot, kernel.num_sites())?;
            }
            for _ in 0..self.r {
                for (node, kernel) in self.nodes.iter().zip(&self.kernels) {
                    state.apply_local_on_branch(node.slot, 1, kernel)?;
                    steps += kernel.gate_count();
                    if !state.postselect_local_zero(node.slot, rng)?.success {
                        trace.push(TraceEvent::restart(node.id, round));
                        restarts += 1;
                        if restarts > self.max_restarts {
                            return Err(Error::RestartCapExceeded(self.max_restarts));
                        }
                        continue 'attempt;
                    }
                }
            }
            return Ok((state, steps, restarts));
        }
    }

    /// One full round: accumulate, then collapse onto the base station.
    pub fn prepare(
        &self,
        outcomes: Outcomes<'_>,
        order: Option<&[usize]>,
        rng: &mut RandomStream,
        round: u64,
        trace: &mut NetworkTrace,
    ) -> Result<Prepared> {
        let (mut state, steps, restarts) = self.accumulate(rng, round, trace)?;
        let id_order: Vec<usize> = (1..self.eta()).collect();
        let collapse = collapse_to_base(
            &self.nodes,
            order.unwrap_or(&id_order),
            &mut state,
            outcomes,
            rng,
            round,
            trace,
        )?;
        Ok(Prepared {
            qubit: state.final_qubit()?,
            elementary_steps: steps + collapse.elementary_steps,
            restarts,
        })
    }
}

/// Distributed estimate `μ_e = wrap(Θ̂ − η·r·π)/(2·r·η·θ)`.
pub fn run_distributed_estimator(
    dataset: &Dataset,
    theta: f64,
    config: &DistributedConfig,
    params: &KickParams,
    rng: &RandomStream,
    mode: ReadoutMode,
) -> Result<(EstimateReport, NetworkTrace)> {
    let protocol = DistributedProtocol::new(dataset, theta, params, config)?;
    let (theta_hat, half_width, steps, restarts, alpha, trace) = match mode {
        ReadoutMode::Ideal => {
            let mut trace = NetworkTrace::default();
            let prep = protocol.prepare(Outcomes::Sampled, None, &mut rng.fork(0), 0, &mut trace)?;
            (ideal_phase(&prep.qubit), 0.0, prep.elementary_steps, prep.restarts, 0, trace)
        }
        ReadoutMode::Sampled => {
            let (readout, traces) = readout_phase_with(
                |i, trial_rng| {
                    let mut trace = NetworkTrace::default();
                    let prep = protocol.prepare(Outcomes::Sampled, None, trial_rng, i, &mut trace)?;
                    Ok((prep, trace))
                },
                params.alpha,
                rng,
            )?;
            let mut trace = NetworkTrace::default();
            for (i, (t, bit)) in traces.into_iter().zip(&readout.outcomes).enumerate() {
                trace.extend(t);
                trace.push(TraceEvent::measure(0, i as u64, *bit));
            }
            (
                readout.theta_hat,
                readout.half_width,
                readout.elementary_steps,
                readout.restarts,
                params.alpha,
                trace,
            )
        }
    };
    let eta = protocol.eta() as u64;
    let r = protocol.r();
    let signal = unwrap_signal(theta_hat, protocol.pi_turns())?;
    let scale = 2.0 * r as f64 * eta as f64 * theta;
    let n_view = protocol.nodes()[0].view.len();
    let report = EstimateReport {
        estimator: Estimator::Distributed,
        mu_e: signal / scale,
        theta,
        r,
        alpha,
        eta,
        restarts,
        elementary_step_count: steps,
        seed: rng.seed(),
        half_width: half_width / scale,
        theta_hat,
        pi_turns: protocol.pi_turns(),
        phase_convention: PhaseBranch::Branch1,
        step_budget: step_budget(n_view, r * eta, alpha),
        ideal: mode == ReadoutMode::Ideal,
        theta_schedule: Vec::new(),
        reductions: None,
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kick::{estimate_mean_serial, Pipeline};
    use crate::qsim::wrap_angle;
    use crate::telecompute::EventKind;
    use std::f64::consts::PI;

    fn params(r: u64) -> KickParams {
        KickParams {
            r: Some(r),
            alpha: 40,
            ..KickParams::default()
        }
    }

    #[test]
    fn single_processor_is_the_serial_pipeline() {
        let d = crate::dataset::Generator::Uniform { mu: 0.01, n: 16 }
            .generate(&mut RandomStream::new(1))
            .unwrap();
        let p = params(30);
        let rng = RandomStream::new(77);
        let serial = estimate_mean_serial(&d, 0.3, &p, &rng, ReadoutMode::Sampled).unwrap();
        let (dist, trace) =
            run_distributed_estimator(&d, 0.3, &DistributedConfig::new(1), &p, &rng, ReadoutMode::Sampled).unwrap();
        assert_eq!(serial.mu_e, dist.mu_e);
        assert_eq!(serial.theta_hat, dist.theta_hat);
        assert_eq!(serial.elementary_step_count, dist.elementary_step_count);
        assert_eq!(serial.restarts, dist.restarts);
        assert_eq!(trace.count(EventKind::Bit), 0);

        let proto = DistributedProtocol::new(&d, 0.3, &p, &DistributedConfig::new(1)).unwrap();
        let pipe = Pipeline::new(&d, 0.3, &p).unwrap();
        for seed in 0..5 {
            let a = proto
                .prepare(Outcomes::Sampled, None, &mut RandomStream::new(seed), 0, &mut NetworkTrace::default())
                .unwrap();
            let b = pipe.run(&mut RandomStream::new(seed)).unwrap();
            assert_eq!(a.qubit, b.qubit);
        }
    }

    #[test]
    fn uniform_two_processors_double_the_phase() {
        let (c, theta, r) = (0.4_f64, 0.2_f64, 5_u64);
        let d = Dataset::new(vec![c; 4]).unwrap();
        let proto = DistributedProtocol::new(&d, theta, &params(r), &DistributedConfig::new(2)).unwrap();
        let single = r as f64 * (PI + 2.0 * (theta * c).asin());
        for bit in [0u8, 1] {
            let prep = proto
                .prepare(Outcomes::Forced(&[bit]), None, &mut RandomStream::new(0), 0, &mut NetworkTrace::default())
                .unwrap();
            assert_eq!(prep.restarts, 0);
            assert!(wrap_angle(ideal_phase(&prep.qubit) - 2.0 * single).abs() < 1e-12);
        }
    }

    #[test]
    fn bound_is_enforced_unless_forced() {
        let d = crate::dataset::Generator::Skewed { mu: 0.0, n: 16 }
            .generate(&mut RandomStream::new(1))
            .unwrap();
        let mut cfg = DistributedConfig::new(64);
        cfg.budget_coeff = Some(1e-4);
        let err = DistributedProtocol::new(&d, 0.3, &params(5), &cfg).unwrap_err();
        assert!(matches!(err, Error::EtaBoundExceeded { eta: 64, .. }));
        cfg.force = true;
        assert!(DistributedProtocol::new(&d, 0.3, &params(5), &cfg).is_ok());
    }

    #[test]
    fn shards_cover_the_mean() {
        let d = crate::dataset::Generator::Uniform { mu: 0.02, n: 16 }
            .generate(&mut RandomStream::new(3))
            .unwrap();
        let mut cfg = DistributedConfig::new(4);
        cfg.shard = true;
        let (rep, _) =
            run_distributed_estimator(&d, 0.2, &cfg, &params(10), &RandomStream::new(5), ReadoutMode::Ideal).unwrap();
        assert!((rep.mu_e - d.mean()).abs() < 0.2 * 0.2, "{rep:?}");
        assert!(rep.within_step_budget());
    }
}

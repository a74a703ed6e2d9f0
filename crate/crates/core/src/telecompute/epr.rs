use super::{collapse_to_base, NetworkTrace, Outcomes, ProcessorNode, TraceEvent};
use crate::branch::{BranchPairState, ScalarPhase};
use crate::dataset::Dataset;
use crate::kick::{ideal_phase, readout_phase_with, step_budget, Prepared, ReadoutMode};
use crate::report::{EstimateReport, Estimator, PhaseBranch};
use crate::{Error, RandomStream, Result};

/// One-shot mean protocol: particle `j` of an `N`-particle cat state rotates
/// the phase of its branch 0 by `θ²·v_j/N`, so branch 0 ends up `θ²·μ` ahead.
#[derive(Clone, Debug)]
pub struct EprProtocol {
    nodes: Vec<ProcessorNode>,
    theta: f64,
}

impl EprProtocol {
    pub fn new(dataset: &Dataset, theta: f64) -> Result<Self> {
        if dataset.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "the protocol needs at least 2 particles, got {}",
                dataset.len()
            )));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidParameter(format!("theta {theta} not in (0, 1]")));
        }
        let nodes = dataset
            .values()
            .iter()
            .enumerate()
            .map(|(id, v)| {
                Ok(ProcessorNode {
                    id,
                    view: Dataset::new(vec![*v])?,
                    slot: id,
                    theta,
                    r: 1,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { nodes, theta })
    }

    pub fn nodes(&self) -> &[ProcessorNode] {
        &self.nodes
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Rotation applied by particle `j`: `θ²·v_j/N`.
    pub fn angle(&self, j: usize) -> f64 {
        self.theta * self.theta * self.nodes[j].view.values()[0] / self.nodes.len() as f64
    }

    /// Rotations only; the cat state before any measurement.
    pub fn rotated_cat(&self) -> Result<BranchPairState> {
        let mut state = BranchPairState::new_cat(self.nodes.len())?;
        for node in &self.nodes {
            state.apply_local_on_branch(node.slot, 0, &ScalarPhase(self.angle(node.id)))?;
        }
        Ok(state)
    }

    /// Runs one round and returns the base station's qubit.
    ///
    /// `order` is the measurement order of particles `1..N` (id order if `None`).
    pub fn prepare(
        &self,
        outcomes: Outcomes<'_>,
        order: Option<&[usize]>,
        rng: &mut RandomStream,
        round: u64,
        trace: &mut NetworkTrace,
    ) -> Result<Prepared> {
        let n = self.nodes.len();
        let mut state = self.rotated_cat()?;
        let id_order: Vec<usize> = (1..n).collect();
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
            // cat preparation (M + N−1 CNOTs) and one rotation per particle
            elementary_steps: 2 * n as u64 + collapse.elementary_steps,
            restarts: 0,
        })
    }
}

/// One sampled round, as round 0 of a fresh trace.
pub fn epr_prepare(
    dataset: &Dataset,
    theta: f64,
    rng: &mut RandomStream,
) -> Result<(Prepared, NetworkTrace)> {
    let mut trace = NetworkTrace::default();
    let prep = EprProtocol::new(dataset, theta)?.prepare(Outcomes::Sampled, None, rng, 0, &mut trace)?;
    Ok((prep, trace))
}

/// Estimates the mean with the one-shot protocol: `μ_e = −Θ̂/θ²`, the sign
/// coming from the phase being written on branch 0.
pub fn run_epr_mean_protocol(
    dataset: &Dataset,
    theta: f64,
    alpha: u64,
    rng: &RandomStream,
    mode: ReadoutMode,
) -> Result<(EstimateReport, NetworkTrace)> {
    let protocol = EprProtocol::new(dataset, theta)?;
    let convention = PhaseBranch::Branch0;
    let (theta_hat, half_width, steps, alpha, trace) = match mode {
        ReadoutMode::Ideal => {
            let mut trace = NetworkTrace::default();
            let prep = protocol.prepare(Outcomes::Sampled, None, &mut rng.fork(0), 0, &mut trace)?;
            (ideal_phase(&prep.qubit), 0.0, prep.elementary_steps, 0, trace)
        }
        ReadoutMode::Sampled => {
            let (readout, traces) = readout_phase_with(
                |i, trial_rng| {
                    let mut trace = NetworkTrace::default();
                    let prep = protocol.prepare(Outcomes::Sampled, None, trial_rng, i, &mut trace)?;
                    Ok((prep, trace))
                },
                alpha,
                rng,
            )?;
            let mut trace = NetworkTrace::default();
            for (i, (t, bit)) in traces.into_iter().zip(&readout.outcomes).enumerate() {
                trace.extend(t);
                trace.push(TraceEvent::measure(0, i as u64, *bit));
            }
            (readout.theta_hat, readout.half_width, readout.elementary_steps, alpha, trace)
        }
    };
    let scale = theta * theta;
    let report = EstimateReport {
        estimator: Estimator::Epr,
        mu_e: convention.readout_sign() * theta_hat / scale,
        theta,
        r: 1,
        alpha,
        eta: dataset.len() as u64,
        restarts: 0,
        elementary_step_count: steps,
        seed: rng.seed(),
        half_width: half_width / scale,
        theta_hat,
        pi_turns: 0,
        phase_convention: convention,
        step_budget: step_budget(dataset.len(), 1, alpha),
        ideal: mode == ReadoutMode::Ideal,
        theta_schedule: Vec::new(),
        reductions: None,
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::telecompute::EventKind;

    fn phase_of(prep: &Prepared) -> f64 {
        -ideal_phase(&prep.qubit)
    }

    #[test]
    fn cancelling_pair_has_zero_phase() {
        let d = Dataset::new(vec![1.0, -1.0]).unwrap();
        let p = EprProtocol::new(&d, 0.5).unwrap();
        for bit in [0u8, 1] {
            let prep = p.prepare(Outcomes::Forced(&[bit]), None, &mut RandomStream::new(0), 0, &mut NetworkTrace::default()).unwrap();
            assert!(phase_of(&prep).abs() < 1e-15);
        }
    }

    #[test]
    fn pair_of_ones_recovers_theta_squared() {
        let d = Dataset::new(vec![1.0, 1.0]).unwrap();
        let p = EprProtocol::new(&d, 0.3).unwrap();
        for bit in [0u8, 1] {
            let mut trace = NetworkTrace::default();
            let prep = p.prepare(Outcomes::Forced(&[bit]), None, &mut RandomStream::new(0), 3, &mut trace).unwrap();
            assert!((phase_of(&prep) - 0.09).abs() < 1e-15);
            assert_eq!(trace.count(EventKind::Bit), 1);
        }
    }

    #[test]
    fn too_small() {
        assert!(EprProtocol::new(&Dataset::new(vec![0.5]).unwrap(), 0.3).is_err());
    }

    #[test]
    fn ideal_estimate_is_exact() {
        let d = Dataset::new(vec![0.5, -0.25, 1.0, 0.0]).unwrap();
        let (rep, trace) = run_epr_mean_protocol(&d, 0.4, 0, &RandomStream::new(4), ReadoutMode::Ideal).unwrap();
        assert!((rep.mu_e - d.mean()).abs() < 1e-12);
        assert_eq!(trace.count(EventKind::Bit), 3);
    }

    #[test]
    fn sampled_estimate_and_trace() {
        let d = Dataset::new(vec![0.5, -0.25, 1.0, 0.0]).unwrap();
        let (rep, trace) = run_epr_mean_protocol(&d, 1.0, 2000, &RandomStream::new(4), ReadoutMode::Sampled).unwrap();
        assert!((rep.mu_e - d.mean()).abs() <= rep.half_width, "{rep:?}");
        assert_eq!(trace.count(EventKind::Bit), 3 * 2000);
        assert_eq!(trace.count(EventKind::Measure), 2000);
        assert!(rep.within_step_budget());
    }
}

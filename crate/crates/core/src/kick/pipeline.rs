use std::f64::consts::PI;

use super::{kick_iteration, KickKernel, KickParams, KickVariant};
use crate::branch::BranchPairState;
use crate::dataset::Dataset;
use crate::qsim::{wrap_angle, StateVector};
use crate::{Error, RandomStream, Result};

/// A configured serial pipeline: ancilla prep, then `r` kick iterations each
/// followed by the all-zero test, restarting from scratch on any failure.
#[derive(Clone, Debug)]
pub struct Pipeline {
    kernel: KickKernel,
    r: u64,
    max_restarts: u64,
}

/// One successful pipeline execution.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    /// Ancilla state `c0|0⟩ + c1|1⟩` after the last iteration.
    pub qubit: StateVector,
    /// `arg(c1/c0)` in `(−π, π]`.
    pub theta_raw: f64,
    /// Iterations whose deterministic π is subtracted at readout.
    pub pi_turns: u64,
    /// `theta_raw − pi_turns·π`, wrapped.
    pub theta_signal: f64,
    pub restarts: u64,
    pub iterations_executed: u64,
    pub elementary_steps: u64,
}

impl PipelineRun {
    fn from_qubit(qubit: StateVector, r: u64, restarts: u64, iterations: u64, steps: u64) -> Self {
        let amps = qubit.amplitudes();
        let theta_raw = (amps[1] / amps[0]).arg();
        Self {
            theta_signal: wrap_angle(theta_raw - r as f64 * PI),
            theta_raw,
            pi_turns: r,
            qubit,
            restarts,
            iterations_executed: iterations,
            elementary_steps: steps,
        }
    }
}

impl Pipeline {
    pub fn new(dataset: &Dataset, theta: f64, params: &KickParams) -> Result<Self> {
        params.validate()?;
        let kernel = KickKernel::new(dataset, theta, params.gamma_mode)?;
        Ok(Self::from_kernel(kernel, params.resolve_r(theta), params.max_restarts))
    }

    pub fn with_variant(
        dataset: &Dataset,
        theta: f64,
        params: &KickParams,
        variant: KickVariant,
    ) -> Result<Self> {
        params.validate()?;
        let kernel = KickKernel::with_variant(dataset, theta, params.gamma_mode, variant)?;
        Ok(Self::from_kernel(kernel, params.resolve_r(theta), params.max_restarts))
    }

    pub fn from_kernel(kernel: KickKernel, r: u64, max_restarts: u64) -> Self {
        Self {
            kernel,
            r,
            max_restarts,
        }
    }

    pub fn kernel(&self) -> &KickKernel {
        &self.kernel
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    /// Runs on the two-branch representation (ancilla = one-slot cat).
    ///
    /// Draws one value per iteration executed.
    pub fn run(&self, rng: &mut RandomStream) -> Result<PipelineRun> {
        let per_iter = self.kernel.gate_count();
        let mut restarts = 0;
        let mut iterations = 0;
        let mut steps = 0;
        'attempt: loop {
            let mut state = BranchPairState::new_cat(1)?;
            state.attach_local_register(0, self.kernel.num_sites())?;
            steps += 1;
            for _ in 0..self.r {
                state.apply_local_on_branch(0, 1, &self.kernel)?;
                iterations += 1;
                steps += per_iter;
                if !state.postselect_local_zero(0, rng)?.success {
                    restarts += 1;
                    if restarts > self.max_restarts {
                        return Err(Error::RestartCapExceeded(self.max_restarts));
                    }
                    continue 'attempt;
                }
            }
            let qubit = state.final_qubit()?;
            return Ok(PipelineRun::from_qubit(qubit, self.r, restarts, iterations, steps));
        }
    }

    /// Reference run on a dense register: ancilla at site 0, data at sites 1..=n.
    ///
    /// Consumes the same draws as [`Pipeline::run`].
    pub fn run_dense(&self, rng: &mut RandomStream) -> Result<PipelineRun> {
        let n = self.kernel.num_sites();
        let data: Vec<usize> = (1..=n).collect();
        let per_iter = self.kernel.gate_count();
        let mut restarts = 0;
        let mut iterations = 0;
        let mut steps = 0;
        'attempt: loop {
            let mut state = StateVector::zero(n + 1)?;
            state.apply_m(0)?;
            steps += 1;
            for _ in 0..self.r {
                kick_iteration(&mut state, 0, &data, &self.kernel, false)?;
                iterations += 1;
                steps += per_iter;
                if !state.postselect_zero(&data, rng)?.success {
                    restarts += 1;
                    if restarts > self.max_restarts {
                        return Err(Error::RestartCapExceeded(self.max_restarts));
                    }
                    continue 'attempt;
                }
            }
            let c0 = state.slice_amplitudes(0, 0, &data)?[0];
            let c1 = state.slice_amplitudes(0, 1, &data)?[0];
            let qubit = StateVector::from_amplitudes(vec![c0, c1])?;
            return Ok(PipelineRun::from_qubit(qubit, self.r, restarts, iterations, steps));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kick::GammaMode;

    fn params(r: u64) -> KickParams {
        KickParams {
            r: Some(r),
            ..KickParams::default()
        }
    }

    #[test]
    fn uniform_three_iterations() {
        let (c, theta) = (0.5, 0.2);
        let d = Dataset::new(vec![c; 8]).unwrap();
        let p = Pipeline::new(&d, theta, &params(3)).unwrap();
        let run = p.run(&mut RandomStream::new(1)).unwrap();
        let expect = wrap_angle(3.0 * PI + 6.0 * (theta * c).asin());
        assert!((run.theta_raw - expect).abs() < 1e-12);
        assert!((run.theta_signal - 6.0 * (theta * c).asin()).abs() < 1e-12);
        assert_eq!(run.restarts, 0);
        assert_eq!(run.pi_turns, 3);
    }

    #[test]
    fn signal_is_additive_over_iterations() {
        let skewed = crate::dataset::Generator::Skewed { mu: 0.02, n: 16 }
            .generate(&mut RandomStream::new(6))
            .unwrap();
        for (d, theta) in [(Dataset::new(vec![0.4; 8]).unwrap(), 0.3), (skewed, 0.2)] {
            let single = wrap_angle(KickKernel::new(&d, theta, GammaMode::ExactArcsin).unwrap().branch_phase() - PI);
            for r in 1..=6 {
                let run = Pipeline::new(&d, theta, &params(r)).unwrap().run(&mut RandomStream::new(r)).unwrap();
                assert!(wrap_angle(run.theta_signal - r as f64 * single).abs() < 1e-9, "r = {r}");
            }
        }
    }

    #[test]
    fn zero_dataset_has_no_signal() {
        let d = Dataset::new(vec![0.0; 4]).unwrap();
        for r in [1, 2, 7] {
            let run = Pipeline::new(&d, 0.4, &params(r)).unwrap().run(&mut RandomStream::new(r)).unwrap();
            assert!(run.theta_signal.abs() < 1e-12);
        }
    }

    #[test]
    fn dense_and_branch_pair_agree() {
        let mut rng = RandomStream::new(5);
        let d = crate::dataset::Generator::Uniform { mu: 0.02, n: 16 }.generate(&mut rng).unwrap();
        // θ large enough that restarts actually happen
        let p = Pipeline::new(&d, 0.95, &KickParams { r: Some(6), gamma_mode: GammaMode::ExactArcsin, ..KickParams::default() }).unwrap();
        let mut saw_restart = false;
        for seed in 0..20 {
            let a = p.run(&mut RandomStream::new(seed)).unwrap();
            let b = p.run_dense(&mut RandomStream::new(seed)).unwrap();
            assert_eq!(a.restarts, b.restarts);
            assert_eq!(a.elementary_steps, b.elementary_steps);
            let diff = a.qubit.max_abs_diff(&b.qubit);
            assert!(diff < 1e-10, "seed {seed}: {diff}");
            saw_restart |= a.restarts > 0;
        }
        assert!(saw_restart);
    }

    #[test]
    fn restart_cap() {
        // final all-zero amplitude −1/2: each attempt fails with probability ≈ ½
        let d = Dataset::new(vec![1.0, -1.0, 0.0, 0.0]).unwrap();
        let p = Pipeline::new(
            &d,
            1.0,
            &KickParams {
                r: Some(50),
                max_restarts: 0,
                ..KickParams::default()
            },
        )
        .unwrap();
        assert!((p.kernel().failure_probability() - 0.75).abs() < 1e-12);
        let errors: Vec<Error> = (0..20)
            .filter_map(|seed| p.run(&mut RandomStream::new(seed)).err())
            .collect();
        assert!(!errors.is_empty());
        assert!(errors.iter().all(|e| *e == Error::RestartCapExceeded(0)));
    }
}

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{check_theta, gamma_of, GammaMode};
use crate::branch::LocalUnitary;
use crate::dataset::Dataset;
use crate::qsim::{Gate, StateVector};
use crate::{Error, Result};

/// Register residue outside `|0…0⟩` tolerated at iteration entry.
const CLEAR_TOLERANCE: f64 = 1e-12;

/// Deliberate defects for negative-control runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KickVariant {
    /// Use `−γ_j` in step 6.
    pub flip_second_rotation: bool,
}

/// The seven-step kick unitary for one dataset and scale.
///
/// The response to `|0…0⟩` is computed once; applying the kernel to a register
/// that is exactly `|0…0⟩` copies it, any other input runs the gates.
#[derive(Clone, Debug)]
pub struct KickKernel {
    num_sites: usize,
    gammas: Vec<f64>,
    variant: KickVariant,
    response: StateVector,
}

/// Branch-1 data-register amplitudes after each of the seven steps, divided by
/// the branch amplitude at entry.
#[derive(Clone, Debug)]
pub struct IterationTrace {
    pub steps: Vec<Vec<Complex64>>,
    /// Probability that the branch-1 data register reads all zero.
    pub success_probability: f64,
}

impl IterationTrace {
    /// Amplitudes `a_j` after the first phase rotation.
    pub fn a(&self) -> &[Complex64] {
        &self.steps[1]
    }

    /// Amplitudes `w_j` after the second Walsh-Hadamard.
    pub fn w(&self) -> &[Complex64] {
        &self.steps[2]
    }

    /// All-zero amplitude after the last step.
    pub fn final_zero(&self) -> Complex64 {
        self.steps[6][0]
    }
}

impl KickKernel {
    pub fn new(dataset: &Dataset, theta: f64, mode: GammaMode) -> Result<Self> {
        Self::with_variant(dataset, theta, mode, KickVariant::default())
    }

    pub fn with_variant(
        dataset: &Dataset,
        theta: f64,
        mode: GammaMode,
        variant: KickVariant,
    ) -> Result<Self> {
        check_theta(theta, dataset.max_abs())?;
        let gammas = dataset
            .values()
            .iter()
            .map(|v| gamma_of(theta * v, mode))
            .collect::<Result<Vec<_>>>()?;
        let num_sites = dataset.num_sites();
        let mut kernel = Self {
            num_sites,
            gammas,
            variant,
            response: StateVector::zero(num_sites)?,
        };
        let sites: Vec<usize> = (0..num_sites).collect();
        let mut response = StateVector::zero(num_sites)?;
        response.apply_all(&kernel.steps(&sites))?;
        kernel.response = response;
        Ok(kernel)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// The seven gates, acting on `data_sites` (most significant first).
    pub fn steps(&self, data_sites: &[usize]) -> Vec<Gate> {
        let first: Vec<(usize, f64)> = self.gammas.iter().copied().enumerate().collect();
        let second: Vec<(usize, f64)> = if self.variant.flip_second_rotation {
            first.iter().map(|&(j, g)| (j, -g)).collect()
        } else {
            first.clone()
        };
        let wh = Gate::wh(data_sites.to_vec());
        vec![
            wh.clone(),
            Gate::diagonal(data_sites.to_vec(), first),
            wh.clone(),
            Gate::basis_phase(data_sites.to_vec(), 0, PI),
            wh.clone(),
            Gate::diagonal(data_sites.to_vec(), second),
            wh,
        ]
    }

    /// Kick applied to `|0…0⟩`.
    pub fn response(&self) -> &StateVector {
        &self.response
    }

    /// Phase the all-zero amplitude picks up in one iteration, in `(−π, π]`.
    pub fn branch_phase(&self) -> f64 {
        self.response.amplitudes()[0].arg()
    }

    /// Probability that the register is not all zero after one iteration from `|0…0⟩`.
    pub fn failure_probability(&self) -> f64 {
        self.response.amplitudes()[1..].iter().map(|a| a.norm_sqr()).sum()
    }

    /// Gate count of one iteration: `4·n + 2·N + 1`.
    pub fn gate_count(&self) -> u64 {
        4 * self.num_sites as u64 + 2 * self.gammas.len() as u64 + 1
    }
}

impl LocalUnitary for KickKernel {
    fn required_sites(&self) -> usize {
        self.num_sites
    }

    fn apply_to(&self, register: &mut StateVector) -> Result<()> {
        if register.num_sites() != self.num_sites {
            return Err(Error::ForeignSites {
                needed: self.num_sites,
                available: register.num_sites(),
            });
        }
        let amps = register.amplitudes();
        let is_zero_state = amps[0] == Complex64::new(1.0, 0.0)
            && amps[1..].iter().all(|a| *a == Complex64::new(0.0, 0.0));
        if is_zero_state {
            *register = self.response.clone();
            Ok(())
        } else {
            let sites: Vec<usize> = (0..self.num_sites).collect();
            register.apply_all(&self.steps(&sites))
        }
    }

    fn elementary_count(&self) -> u64 {
        self.gate_count()
    }
}

/// Runs one kick iteration on `data_sites`, conditioned on `ancilla` being 1.
///
/// The data register must be all zero on both ancilla branches at entry.
/// With `trace`, the branch-1 amplitudes after every step are recorded.
pub fn kick_iteration(
    state: &mut StateVector,
    ancilla: usize,
    data_sites: &[usize],
    kernel: &KickKernel,
    trace: bool,
) -> Result<Option<IterationTrace>> {
    if data_sites.len() != kernel.num_sites {
        return Err(Error::InvalidParameter(format!(
            "kernel needs {} data sites, got {}",
            kernel.num_sites,
            data_sites.len()
        )));
    }
    let probs = state.outcome_probabilities(data_sites)?;
    let residual: f64 = probs[1..].iter().sum();
    if residual > CLEAR_TOLERANCE {
        return Err(Error::DataRegisterNotClear(residual));
    }
    let branch_amp = if trace {
        let slice = state.slice_amplitudes(ancilla, 1, data_sites)?;
        Some(slice[0])
    } else {
        None
    };
    let mut steps = Vec::new();
    for gate in kernel.steps(data_sites) {
        state.apply(&gate.controlled_by(ancilla)?)?;
        if let Some(c) = branch_amp {
            let slice = state.slice_amplitudes(ancilla, 1, data_sites)?;
            steps.push(slice.into_iter().map(|a| a / c).collect::<Vec<_>>());
        }
    }
    Ok(branch_amp.map(|_| {
        let success_probability = steps[6][0].norm_sqr();
        IterationTrace {
            steps,
            success_probability,
        }
    }))
}

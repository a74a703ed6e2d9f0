use num_complex::Complex64;

use super::{check_theta, gamma_of, GammaMode};
use crate::dataset::Dataset;
use crate::Result;

/// Closed-form per-step quantities of one kick iteration, by direct summation.
#[derive(Clone, Debug)]
pub struct AmplitudeOracle {
    /// `a_j = (√(1−x_j²) + i·x_j)/√N` after the first rotation.
    pub a: Vec<Complex64>,
    /// All-zero amplitude after the second Walsh-Hadamard: `⟨√(1−x²)⟩ + i⟨x⟩`.
    pub w0: Complex64,
    /// All-zero amplitude after the last step: `⟨e^{2iγ}⟩ − 2·w0²`.
    pub final_zero: Complex64,
    /// `1 − |final_zero|²`, evaluated as the variance of `(e^{iγ_j} − w0)²`
    /// over `j` so that no near-cancelling subtraction is involved.
    pub failure_probability: f64,
}

impl AmplitudeOracle {
    /// Per-iteration branch phase in `(−π, π]`.
    pub fn branch_phase(&self) -> f64 {
        self.final_zero.arg()
    }
}

/// `e^{iγ}` for `x = θ·v`, written without a complex exponential in exact mode.
fn unit_phase(x: f64, mode: GammaMode) -> Result<Complex64> {
    Ok(match mode {
        GammaMode::ExactArcsin => {
            gamma_of(x, mode)?;
            Complex64::new((1.0 - x * x).sqrt(), x)
        }
        GammaMode::Linear => {
            let g = gamma_of(x, mode)?;
            Complex64::new(g.cos(), g.sin())
        }
    })
}

pub fn amplitude_oracle(dataset: &Dataset, theta: f64, mode: GammaMode) -> Result<AmplitudeOracle> {
    check_theta(theta, dataset.max_abs())?;
    let n = dataset.len() as f64;
    let e: Vec<Complex64> = dataset
        .values()
        .iter()
        .map(|v| unit_phase(theta * v, mode))
        .collect::<Result<_>>()?;
    let scale = 1.0 / n.sqrt();
    let a = e.iter().map(|z| z * scale).collect();
    let w0 = e.iter().sum::<Complex64>() / n;
    let mean_e2 = e.iter().map(|z| z * z).sum::<Complex64>() / n;
    let final_zero = mean_e2 - 2.0 * w0 * w0;
    let f: Vec<Complex64> = e.iter().map(|z| (z - w0) * (z - w0)).collect();
    let f_mean = f.iter().sum::<Complex64>() / n;
    let failure_probability = f.iter().map(|z| (z - f_mean).norm_sqr()).sum::<f64>() / n;
    Ok(AmplitudeOracle {
        a,
        w0,
        final_zero,
        failure_probability,
    })
}

//! Machine-readable reports. Field names are part of the on-disk format.

use serde::{Deserialize, Serialize};

/// Which estimator produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Serial,
    Epr,
    Distributed,
}

/// Branch on which the data phase is accumulated.
///
/// The readout measures the phase of `|1⟩` relative to `|0⟩`; a phase written
/// on branch 0 therefore reads out with the opposite sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseBranch {
    Branch0,
    Branch1,
}

impl PhaseBranch {
    /// Sign mapping the read-out phase to the accumulated data phase.
    pub fn readout_sign(self) -> f64 {
        match self {
            PhaseBranch::Branch0 => -1.0,
            PhaseBranch::Branch1 => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: Estimator,
    pub mu_e: f64,
    pub theta: f64,
    pub r: u64,
    pub alpha: u64,
    pub eta: u64,
    pub restarts: u64,
    pub elementary_step_count: u64,
    pub seed: u64,
    pub half_width: f64,
    /// Raw read-out phase before removing the deterministic π turns.
    pub theta_hat: f64,
    /// Number of deterministic π turns removed from `theta_hat`.
    pub pi_turns: u64,
    pub phase_convention: PhaseBranch,
    /// `C·N·log₂N·r·α` budget the step count is checked against.
    pub step_budget: u64,
    pub ideal: bool,
    /// θ values tried by the reduction schedule, when one ran.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta_schedule: Vec<f64>,
    /// θ reductions performed by the schedule, when one ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reductions: Option<u32>,
}

impl EstimateReport {
    pub fn within_step_budget(&self) -> bool {
        self.elementary_step_count <= self.step_budget
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub estimate: f64,
    pub n_samples: u64,
    /// Standard deviation of the estimate over repeats (0 for a single run).
    pub std: f64,
    pub repeats: u64,
    pub samples_drawn: u64,
    pub seed: u64,
}

/// Serializes with a trailing newline.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports are plain data");
    s.push('\n');
    s
}

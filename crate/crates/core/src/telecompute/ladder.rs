use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::kick::ideal_phase;
use crate::qsim::{wrap_angle, StateVector};
use crate::{Error, RandomStream, Result};

/// One level of the ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderLevel {
    pub level: usize,
    /// Systems entering the level.
    pub input: usize,
    pub pairs: usize,
    /// Pairs whose second qubit read 0.
    pub successes: usize,
    /// Relative phase of each surviving system.
    pub phases: Vec<f64>,
    /// Largest deviation of a survivor's phase from the sum of its parents' phases.
    pub max_phase_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderReport {
    pub levels: Vec<LadderLevel>,
    /// True when a requested level had fewer than two systems to pair.
    pub ended_early: bool,
    pub pairs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub final_phases: Vec<f64>,
}

/// `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn phase_qubit(phi: f64) -> Result<StateVector> {
    StateVector::from_amplitudes(vec![
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2, phi),
    ])
}

/// CNOT with `first` as control, then a computational-basis measurement of
/// `second`. Returns the first qubit when the second reads 0, with the
/// measured bit.
pub fn pair_and_double(
    first: &StateVector,
    second: &StateVector,
    rng: &mut RandomStream,
) -> Result<(Option<StateVector>, u8)> {
    let mut pair = first.tensor(second)?;
    pair.apply_cnot(0, 1)?;
    let m = pair.measure_sites(&[1], rng)?;
    let bit = m.bits[0];
    if bit == 1 {
        return Ok((None, 1));
    }
    let amps = m.posterior.slice_amplitudes(1, 0, &[0])?;
    Ok((Some(StateVector::from_amplitudes(amps)?), 0))
}

/// Repeatedly pairs surviving systems, keeping the first of each pair when
/// the second reads 0. Unpaired leftovers and failed pairs are dropped.
///
/// Runs `levels` levels, or until fewer than two systems remain if `None`.
pub fn cnot_doubling_ladder(phases: &[f64], levels: Option<usize>, rng: &mut RandomStream) -> Result<LadderReport> {
    if phases.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "the ladder needs at least 2 systems, got {}",
            phases.len()
        )));
    }
    let mut systems = phases.iter().map(|p| phase_qubit(*p)).collect::<Result<Vec<_>>>()?;
    let mut report = LadderReport {
        levels: Vec::new(),
        ended_early: false,
        pairs: 0,
        successes: 0,
        success_rate: 0.0,
        final_phases: Vec::new(),
    };
    let mut level = 0;
    loop {
        if levels.is_some_and(|l| level >= l) {
            break;
        }
        if systems.len() < 2 {
            report.ended_early = levels.is_some();
            break;
        }
        let mut next = Vec::with_capacity(systems.len() / 2);
        let mut max_err: f64 = 0.0;
        let pairs = systems.len() / 2;
        for pair in systems.chunks_exact(2) {
            let expected = ideal_phase(&pair[0]) + ideal_phase(&pair[1]);
            if let (Some(q), _) = pair_and_double(&pair[0], &pair[1], rng)? {
                max_err = max_err.max(wrap_angle(ideal_phase(&q) - expected).abs());
                next.push(q);
            }
        }
        report.pairs += pairs;
        report.successes += next.len();
        report.levels.push(LadderLevel {
            level,
            input: systems.len(),
            pairs,
            successes: next.len(),
            phases: next.iter().map(ideal_phase).collect(),
            max_phase_error: max_err,
        });
        systems = next;
        level += 1;
    }
    report.success_rate = if report.pairs > 0 {
        report.successes as f64 / report.pairs as f64
    } else {
        0.0
    };
    report.final_phases = systems.iter().map(ideal_phase).collect();
    Ok(report)
}

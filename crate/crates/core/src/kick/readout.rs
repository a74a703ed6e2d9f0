use std::f64::consts::FRAC_PI_2;

use crate::par;
use crate::qsim::StateVector;
use crate::{Error, RandomStream, Result};

/// Half-width coefficient `c` in `c/√α`: two standard deviations of the
/// angle estimate for a balanced qubit.
pub const READOUT_HALF_WIDTH_C: f64 = 2.0 * std::f64::consts::SQRT_2;

/// A freshly prepared single-site system and what it cost.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub qubit: StateVector,
    pub elementary_steps: u64,
    pub restarts: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    /// Estimated relative phase of `|1⟩` against `|0⟩`, in `(−π, π]`.
    pub theta_hat: f64,
    pub half_width: f64,
    /// `[offset][outcome]` counts; offset 1 carries the extra π/2 rotation.
    pub counts: [[u64; 2]; 2],
    /// Measured bit of every trial, in trial order.
    pub outcomes: Vec<u8>,
    pub elementary_steps: u64,
    pub restarts: u64,
}

/// Exact relative phase `arg(c1/c0)` of a prepared system.
pub fn ideal_phase(qubit: &StateVector) -> f64 {
    let a = qubit.amplitudes();
    (a[1] / a[0]).arg()
}

/// Interference readout of the relative phase of prepared systems.
///
/// Even-numbered trials apply `M` and measure directly, giving
/// `P(0) = ½ + |c0 c1|·cos Θ`. Odd-numbered trials first rotate `|1⟩` by π/2,
/// giving `P(0) = ½ − |c0 c1|·sin Θ`. `Θ̂ = atan2(ŝ, ĉ)` recovers both sign and
/// quadrant. Trial `i` runs on `rng.fork(i)`, so the result does not depend on
/// execution order.
pub fn readout_phase<P>(preparer: P, alpha: u64, rng: &RandomStream) -> Result<Readout>
where
    P: Fn(u64, &mut RandomStream) -> Result<Prepared> + Sync + Send,
{
    readout_phase_with(|i, trial_rng| Ok((preparer(i, trial_rng)?, ())), alpha, rng).map(|(r, _)| r)
}

/// As [`readout_phase`], also collecting a per-trial payload from the preparer, in trial order.
pub fn readout_phase_with<P, T>(preparer: P, alpha: u64, rng: &RandomStream) -> Result<(Readout, Vec<T>)>
where
    P: Fn(u64, &mut RandomStream) -> Result<(Prepared, T)> + Sync + Send,
    T: Send,
{
    if alpha < 2 {
        return Err(Error::InvalidParameter("readout needs alpha ≥ 2".into()));
    }
    let trials = par::map_indexed(alpha, |i| -> Result<(usize, u8, u64, u64, T)> {
        let mut trial_rng = rng.fork(i);
        let (mut prep, payload) = preparer(i, &mut trial_rng)?;
        let offset = (i % 2) as usize;
        let mut extra = 1;
        if offset == 1 {
            prep.qubit.rotate_basis_phase(1, FRAC_PI_2)?;
            extra += 1;
        }
        prep.qubit.apply_m(0)?;
        let bit = prep.qubit.measure_sites(&[0], &mut trial_rng)?.bits[0];
        Ok((offset, bit, prep.elementary_steps + extra, prep.restarts, payload))
    });
    let mut counts = [[0u64; 2]; 2];
    let mut outcomes = Vec::with_capacity(alpha as usize);
    let mut payloads = Vec::with_capacity(alpha as usize);
    let mut elementary_steps = 0;
    let mut restarts = 0;
    for t in trials {
        let (offset, bit, steps, r, payload) = t?;
        counts[offset][bit as usize] += 1;
        outcomes.push(bit);
        payloads.push(payload);
        elementary_steps += steps;
        restarts += r;
    }
    let freq0 = |o: usize| counts[o][0] as f64 / (counts[o][0] + counts[o][1]) as f64;
    let cos_est = 2.0 * freq0(0) - 1.0;
    let sin_est = 1.0 - 2.0 * freq0(1);
    let readout = Readout {
        theta_hat: sin_est.atan2(cos_est),
        half_width: READOUT_HALF_WIDTH_C / (alpha as f64).sqrt(),
        counts,
        outcomes,
        elementary_steps,
        restarts,
    };
    Ok((readout, payloads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn fixed(theta: f64) -> impl Fn(u64, &mut RandomStream) -> Result<Prepared> + Sync + Send {
        move |_, _| {
            Ok(Prepared {
                qubit: StateVector::from_amplitudes(vec![
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                    Complex64::from_polar(FRAC_1_SQRT_2, theta),
                ])?,
                elementary_steps: 0,
                restarts: 0,
            })
        }
    }

    #[test]
    fn mean_over_seeds_is_unbiased() {
        for target in [0.3, -1.2, 2.0] {
            let runs: Vec<Readout> = (0..100)
                .map(|seed| readout_phase(fixed(target), 400, &RandomStream::new(seed)).unwrap())
                .collect();
            let mean = runs.iter().map(|r| r.theta_hat).sum::<f64>() / runs.len() as f64;
            let band = 3.0 * runs[0].half_width / 10.0;
            assert!((mean - target).abs() <= band, "{target}: mean {mean}, band {band}");
        }
    }

    #[test]
    fn zero_phase_is_certain() {
        let r = readout_phase(fixed(0.0), 100, &RandomStream::new(1)).unwrap();
        assert_eq!(r.counts[0], [50, 0]);
        assert!(r.theta_hat.abs() < 0.5);
    }

    #[test]
    fn quarter_turn_is_balanced_at_offset_zero() {
        let mut plus = fixed(FRAC_PI_2)(0, &mut RandomStream::new(0)).unwrap().qubit;
        plus.apply_m(0).unwrap();
        assert!((plus.probability_of(0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sign_is_recovered() {
        let alpha = 10_000;
        for theta in [FRAC_PI_4, -FRAC_PI_4] {
            let r = readout_phase(fixed(theta), alpha, &RandomStream::new(9)).unwrap();
            assert!((r.theta_hat - theta).abs() <= 5.0 / (alpha as f64).sqrt(), "{} vs {theta}", r.theta_hat);
        }
    }

    #[test]
    fn alpha_too_small() {
        assert!(readout_phase(fixed(0.0), 1, &RandomStream::new(0)).is_err());
    }

    #[test]
    fn ideal_phase_reads_argument() {
        let q = fixed(-2.0)(0, &mut RandomStream::new(0)).unwrap().qubit;
        assert!((ideal_phase(&q) + 2.0).abs() < 1e-12);
    }
}

//! Classical sampling estimate of the mean, for comparison.

use crate::dataset::Dataset;
use crate::par;
use crate::report::BaselineReport;
use crate::{Error, RandomStream, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Uniform draws with replacement.
    #[default]
    WithReplacement,
    /// Visits every value once in order, then wraps; exact for `n_samples = N`.
    Exhaustive,
}

/// Sample mean of `n_samples` values.
pub fn classical_mean_estimate(
    dataset: &Dataset,
    n_samples: u64,
    mode: SamplingMode,
    rng: &mut RandomStream,
) -> Result<BaselineReport> {
    if dataset.is_empty() {
        return Err(Error::InvalidDataset("empty".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be ≥ 1".into()));
    }
    let v = dataset.values();
    let sum: f64 = match mode {
        SamplingMode::WithReplacement => (0..n_samples).map(|_| v[rng.below(v.len())]).sum(),
        SamplingMode::Exhaustive => (0..n_samples as usize).map(|i| v[i % v.len()]).sum(),
    };
    Ok(BaselineReport {
        estimate: sum / n_samples as f64,
        n_samples,
        std: 0.0,
        repeats: 1,
        samples_drawn: n_samples,
        seed: rng.seed(),
    })
}

/// Repeats the with-replacement estimate on `rng.fork(i)` and reports the
/// mean estimate and its empirical standard deviation.
pub fn repeated_estimate(
    dataset: &Dataset,
    n_samples: u64,
    repeats: u64,
    rng: &RandomStream,
) -> Result<(BaselineReport, Vec<f64>)> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be ≥ 1".into()));
    }
    let estimates = par::map_indexed(repeats, |i| {
        classical_mean_estimate(dataset, n_samples, SamplingMode::WithReplacement, &mut rng.fork(i))
            .map(|r| r.estimate)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let m = estimates.iter().sum::<f64>() / repeats as f64;
    let var = if repeats > 1 {
        estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (repeats - 1) as f64
    } else {
        0.0
    };
    Ok((
        BaselineReport {
            estimate: m,
            n_samples,
            std: var.sqrt(),
            repeats,
            samples_drawn: n_samples * repeats,
            seed: rng.seed(),
        },
        estimates,
    ))
}

/// `⌈coeff/ε²⌉` samples for precision `ε`.
pub fn required_samples(epsilon: f64, coeff: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1)")));
    }
    if !(coeff > 0.0) {
        return Err(Error::InvalidParameter(format!("coeff {coeff} must be positive")));
    }
    // Guard against 1/0.01² landing a hair above an integer.
    let raw = coeff / (epsilon * epsilon);
    let rounded = raw.round();
    Ok(if (raw - rounded).abs() < 1e-9 * raw { rounded } else { raw.ceil() } as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Generator;

    #[test]
    fn constant_dataset_is_exact() {
        let d = Dataset::new(vec![0.5; 8]).unwrap();
        for n in [1, 7, 100] {
            let r = classical_mean_estimate(&d, n, SamplingMode::WithReplacement, &mut RandomStream::new(n)).unwrap();
            assert_eq!(r.estimate, 0.5);
        }
    }

    #[test]
    fn exhaustive_pass_is_exact() {
        let d = Generator::Uniform { mu: 0.1, n: 64 }.generate(&mut RandomStream::new(2)).unwrap();
        let r = classical_mean_estimate(&d, 64, SamplingMode::Exhaustive, &mut RandomStream::new(0)).unwrap();
        assert!((r.estimate - d.mean()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let d = Generator::Uniform { mu: 0.0, n: 16 }.generate(&mut RandomStream::new(2)).unwrap();
        let a = classical_mean_estimate(&d, 50, SamplingMode::WithReplacement, &mut RandomStream::new(8)).unwrap();
        let b = classical_mean_estimate(&d, 50, SamplingMode::WithReplacement, &mut RandomStream::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn required_sample_counts() {
        assert_eq!(required_samples(0.1, 1.0).unwrap(), 100);
        assert_eq!(required_samples(0.01, 1.0).unwrap(), 10_000);
        assert!(required_samples(1.0, 1.0).is_err());
        assert!(required_samples(0.0, 1.0).is_err());
    }

    #[test]
    fn zero_samples_rejected() {
        let d = Dataset::new(vec![0.5; 2]).unwrap();
        assert!(classical_mean_estimate(&d, 0, SamplingMode::WithReplacement, &mut RandomStream::new(0)).is_err());
    }
}

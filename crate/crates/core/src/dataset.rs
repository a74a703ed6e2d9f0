//! The values whose mean is estimated, plus file loading and generators.

use std::path::Path;
use std::str::FromStr;

use crate::{Error, RandomStream, Result};

/// Values `v_j ∈ [−1, 1]`; the length is a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDataset("empty".into()));
        }
        if !values.len().is_power_of_two() {
            return Err(Error::InvalidDataset(format!(
                "length {} is not a power of two",
                values.len()
            )));
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::OutOfDomain(v));
        }
        Ok(Self { values })
    }

    /// Keeps the longest power-of-two prefix; returns the dataset and the number dropped.
    pub fn truncated(mut values: Vec<f64>) -> Result<(Self, usize)> {
        if values.is_empty() {
            return Err(Error::InvalidDataset("empty".into()));
        }
        let keep = 1usize << (usize::BITS - 1 - values.len().leading_zeros());
        let dropped = values.len() - keep;
        values.truncate(keep);
        Ok((Self::new(values)?, dropped))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `log2(N)`, the number of data sites.
    pub fn num_sites(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Contiguous shard `index` of `parts` (lengths must divide evenly).
    pub fn shard(&self, index: usize, parts: usize) -> Result<Dataset> {
        if parts == 0 || index >= parts || self.len() % parts != 0 {
            return Err(Error::InvalidParameter(format!(
                "cannot take shard {index} of {parts} from {} values",
                self.len()
            )));
        }
        let size = self.len() / parts;
        Dataset::new(self.values[index * size..(index + 1) * size].to_vec())
    }

    /// Parses one value per line; blank lines and `#` comments are skipped.
    pub fn parse_csv(text: &str) -> Result<Vec<f64>> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.trim_end_matches(',')
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidDataset(format!("bad value {l:?}: {e}")))
            })
            .collect()
    }

    pub fn parse_json(text: &str) -> Result<Vec<f64>> {
        serde_json::from_str(text).map_err(|e| Error::InvalidDataset(format!("bad JSON array: {e}")))
    }

    /// Reads a CSV or JSON array file (chosen by a leading `[`).
    pub fn read_values(path: &Path) -> Result<Vec<f64>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidDataset(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('[') {
            Self::parse_json(&text)
        } else {
            Self::parse_csv(&text)
        }
    }
}

/// Recipes for synthetic datasets.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// `n − 1` uniform values on `mu ± (1 − |mu|)`, the last chosen so the mean is
    /// exactly `mu`; redrawn until the last value is in range.
    Uniform { mu: f64, n: usize },
    /// Right-skewed values shifted to mean `mu`; used by the θ sweeps so the
    /// third central moment, which sets the leading phase error, is not near zero.
    Skewed { mu: f64, n: usize },
    Constant { c: f64, n: usize },
    List(Vec<f64>),
}

const MAX_GENERATOR_TRIES: usize = 100_000;

impl Generator {
    pub fn generate(&self, rng: &mut RandomStream) -> Result<Dataset> {
        match self {
            Generator::Uniform { mu, n } => {
                check_gen(*mu, *n)?;
                for _ in 0..MAX_GENERATOR_TRIES {
                    let spread = 1.0 - mu.abs();
                    let mut v: Vec<f64> = (0..n - 1).map(|_| mu + spread * rng.uniform(-1.0, 1.0)).collect();
                    let last = *mu * *n as f64 - v.iter().sum::<f64>();
                    if last.abs() <= 1.0 {
                        v.push(last);
                        return Dataset::new(v);
                    }
                }
                Err(Error::InvalidParameter(format!(
                    "could not hit mean {mu} with {n} bounded values"
                )))
            }
            Generator::Skewed { mu, n } => {
                check_gen(*mu, *n)?;
                let u: Vec<f64> = (0..*n)
                    .map(|_| {
                        let x = rng.next_f64();
                        0.6 * (2.0 * x * x - 2.0 / 3.0)
                    })
                    .collect();
                let shift = *mu - u.iter().sum::<f64>() / *n as f64;
                Dataset::new(u.into_iter().map(|x| x + shift).collect())
            }
            Generator::Constant { c, n } => Dataset::new(vec![*c; *n]),
            Generator::List(v) => Dataset::new(v.clone()),
        }
    }
}

fn check_gen(mu: f64, n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("n = {n} must be a power of two ≥ 2")));
    }
    if !(mu.abs() < 1.0) {
        return Err(Error::OutOfDomain(mu));
    }
    Ok(())
}

impl FromStr for Generator {
    type Err = Error;

    /// `uniform:mu=0.005,n=256`, `skew:mu=0.01,n=256`, `const:c=0.5,n=4`, `list:0.5,-0.25,1,0`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("generator {s:?}: {msg}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        if kind == "list" {
            let values = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad("bad list value")))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Generator::List(values));
        }
        let mut mu = None;
        let mut c = None;
        let mut n = None;
        for kv in rest.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k.trim() {
                "mu" => mu = Some(v.trim().parse::<f64>().map_err(|_| bad("bad mu"))?),
                "c" => c = Some(v.trim().parse::<f64>().map_err(|_| bad("bad c"))?),
                "n" => n = Some(v.trim().parse::<usize>().map_err(|_| bad("bad n"))?),
                other => return Err(bad(&format!("unknown key {other}"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing n"))?;
        match kind {
            "uniform" => Ok(Generator::Uniform {
                mu: mu.ok_or_else(|| bad("missing mu"))?,
                n,
            }),
            "skew" => Ok(Generator::Skewed {
                mu: mu.ok_or_else(|| bad("missing mu"))?,
                n,
            }),
            "const" => Ok(Generator::Constant {
                c: c.ok_or_else(|| bad("missing c"))?,
                n,
            }),
            _ => Err(bad("unknown generator")),
        }
    }
}

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use super::Gate;
use crate::par;
use crate::{Error, RandomStream, Result};

pub type Amplitude = Complex64;

/// Largest register [`StateVector::zero`] accepts without an explicit limit.
pub const DEFAULT_MAX_SITES: usize = 20;
/// Allowed drift of the L2 norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Per-amplitude equality tolerance used by comparisons in tests.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-12;

/// Dense amplitude vector over `2^num_sites` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_sites: usize,
    amps: Vec<Amplitude>,
}

/// Result of a projective measurement of some sites.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub sites: Vec<usize>,
    pub bits: Vec<u8>,
    pub posterior: StateVector,
    pub probability: f64,
}

/// Result of the binary measurement "are all listed sites 0?".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTest {
    pub success: bool,
    /// Probability of the all-zero outcome before the measurement.
    pub probability: f64,
}

#[derive(Serialize)]
struct DumpEntry {
    index: usize,
    re: f64,
    im: f64,
}

#[inline]
fn site_bit(num_sites: usize, site: usize) -> usize {
    1 << (num_sites - 1 - site)
}

impl StateVector {
    /// `|0…0⟩` over `num_sites` sites.
    pub fn zero(num_sites: usize) -> Result<Self> {
        Self::zero_with_limit(num_sites, DEFAULT_MAX_SITES)
    }

    pub fn zero_with_limit(num_sites: usize, limit: usize) -> Result<Self> {
        Self::basis_with_limit(num_sites, 0, limit)
    }

    /// Basis state `|index⟩`.
    pub fn basis(num_sites: usize, index: usize) -> Result<Self> {
        Self::basis_with_limit(num_sites, index, DEFAULT_MAX_SITES)
    }

    fn basis_with_limit(num_sites: usize, index: usize, limit: usize) -> Result<Self> {
        if num_sites > limit {
            return Err(Error::TooManySites {
                requested: num_sites,
                limit,
            });
        }
        let dim = 1usize << num_sites;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_sites, amps })
    }

    /// Wraps an explicit amplitude vector; it must be finite and normalized.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let state = Self::from_amplitudes_unnormalized(amps)?;
        state.check_norm()?;
        Ok(state)
    }

    pub(crate) fn from_amplitudes_unnormalized(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        if let Some(i) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let num_sites = len.trailing_zeros() as usize;
        if num_sites > DEFAULT_MAX_SITES {
            return Err(Error::TooManySites {
                requested: num_sites,
                limit: DEFAULT_MAX_SITES,
            });
        }
        Ok(Self { num_sites, amps })
    }

    /// Tensor product `self ⊗ other`; `self` supplies the more significant sites.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let total = self.num_sites + other.num_sites;
        if total > DEFAULT_MAX_SITES {
            return Err(Error::TooManySites {
                requested: total,
                limit: DEFAULT_MAX_SITES,
            });
        }
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(Self {
            num_sites: total,
            amps,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Amplitude] {
        &mut self.amps
    }

    pub fn amplitude(&self, index: usize) -> Result<Amplitude> {
        self.amps.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            dim: self.amps.len(),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_norm(&self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NormViolation(norm));
        }
        Ok(())
    }

    /// `|amp|²` of one basis state.
    pub fn probability_of(&self, index: usize) -> Result<f64> {
        self.amplitude(index).map(|a| a.norm_sqr())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest per-amplitude distance, or infinity for mismatched sizes.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.amps.len() != other.amps.len() {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// JSON list of `{index, re, im}` for amplitudes with modulus above 1e-14.
    pub fn to_debug_json(&self) -> String {
        let entries: Vec<DumpEntry> = self
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-14)
            .map(|(index, a)| DumpEntry {
                index,
                re: a.re,
                im: a.im,
            })
            .collect();
        serde_json::to_string(&entries).expect("plain numbers serialize")
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < self.num_sites {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                site,
                num_sites: self.num_sites,
            })
        }
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for (i, &s) in sites.iter().enumerate() {
            self.check_site(s)?;
            if sites[..i].contains(&s) {
                return Err(Error::DuplicateSite(s));
            }
        }
        Ok(())
    }

    /// Index of the sub-register `sites` (most significant first) within basis index `i`.
    #[inline]
    fn sub_index(&self, i: usize, sites: &[usize]) -> usize {
        sites.iter().fold(0, |acc, &s| {
            (acc << 1) | ((i >> (self.num_sites - 1 - s)) & 1)
        })
    }

    /// Amplitudes of the sub-register `sites` on the slice where `control` reads `bit`.
    ///
    /// `control` and `sites` together must cover every site of the register.
    pub fn slice_amplitudes(&self, control: usize, bit: u8, sites: &[usize]) -> Result<Vec<Amplitude>> {
        self.check_site(control)?;
        self.check_sites(sites)?;
        if sites.contains(&control) {
            return Err(Error::ControlOverlap(control));
        }
        if sites.len() + 1 != self.num_sites {
            return Err(Error::InvalidParameter(
                "control plus sites must cover the register".into(),
            ));
        }
        let cb = site_bit(self.num_sites, control);
        let want = if bit == 1 { cb } else { 0 };
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << sites.len()];
        for (i, a) in self.amps.iter().enumerate() {
            if i & cb == want {
                out[self.sub_index(i, sites)] = *a;
            }
        }
        Ok(out)
    }

    /// The `M` gate on one site.
    pub fn apply_m(&mut self, site: usize) -> Result<()> {
        self.apply(&Gate::M(site))
    }

    /// `M` on each listed site.
    pub fn apply_wh(&mut self, sites: &[usize]) -> Result<()> {
        self.apply(&Gate::Wh(sites.to_vec()))
    }

    /// Multiplies amplitude `basis_index` by `e^{i·angle}`.
    pub fn rotate_basis_phase(&mut self, basis_index: usize, angle: f64) -> Result<()> {
        let dim = self.amps.len();
        if basis_index >= dim {
            return Err(Error::IndexOutOfRange {
                index: basis_index,
                dim,
            });
        }
        self.amps[basis_index] *= Complex64::from_polar(1.0, angle);
        self.check_norm()
    }

    /// Multiplies each listed amplitude by `e^{i·angle}`; unlisted amplitudes are unchanged.
    pub fn apply_diagonal_phase(&mut self, angles: &[(usize, f64)]) -> Result<()> {
        let dim = self.amps.len();
        if let Some(&(index, _)) = angles.iter().find(|(i, _)| *i >= dim) {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        for &(i, angle) in angles {
            self.amps[i] *= Complex64::from_polar(1.0, angle);
        }
        self.check_norm()
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply(&Gate::cnot(control, target))
    }

    /// Applies `gate` on the subspace where `control` is 1.
    pub fn apply_controlled(&mut self, control: usize, gate: &Gate) -> Result<()> {
        self.apply(&gate.clone().controlled_by(control)?)
    }

    /// Validates and applies a gate, then checks the norm invariant.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_sites)?;
        self.apply_masked(gate, 0);
        self.check_norm()
    }

    /// Applies a sequence of gates.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn apply_masked(&mut self, gate: &Gate, mask: usize) {
        let n = self.num_sites;
        match gate {
            Gate::M(site) => {
                let bit = site_bit(n, *site);
                let h = FRAC_1_SQRT_2;
                par::for_each_chunk_mut(&mut self.amps, 2 * bit, |ci, chunk| {
                    let base = ci * 2 * bit;
                    let (lo, hi) = chunk.split_at_mut(bit);
                    for k in 0..bit {
                        if (base + k) & mask == mask {
                            let (a, b) = (lo[k], hi[k]);
                            lo[k] = (a + b) * h;
                            hi[k] = (a - b) * h;
                        }
                    }
                });
            }
            Gate::Wh(sites) => {
                for &s in sites {
                    self.apply_masked(&Gate::M(s), mask);
                }
            }
            Gate::Phase { sites, angles } => {
                let mut table: Vec<Option<Complex64>> = vec![None; 1 << sites.len()];
                for &(idx, angle) in angles {
                    let f = Complex64::from_polar(1.0, angle);
                    table[idx] = Some(table[idx].map_or(f, |g| g * f));
                }
                let this = &*self;
                let sub: Vec<usize> = if mask == 0 && sites.len() == n && sites.iter().enumerate().all(|(i, &s)| i == s) {
                    Vec::new()
                } else {
                    (0..this.amps.len()).map(|i| this.sub_index(i, sites)).collect()
                };
                par::for_each_indexed_mut(&mut self.amps, |i, a| {
                    if i & mask != mask {
                        return;
                    }
                    let j = if sub.is_empty() { i } else { sub[i] };
                    if let Some(f) = table[j] {
                        *a *= f;
                    }
                });
            }
            Gate::Cnot { control, target } => {
                let cb = site_bit(n, *control);
                let tb = site_bit(n, *target);
                par::for_each_chunk_mut(&mut self.amps, 2 * tb, |ci, chunk| {
                    let base = ci * 2 * tb;
                    let (lo, hi) = chunk.split_at_mut(tb);
                    for k in 0..tb {
                        let i = base + k;
                        if i & cb != 0 && i & mask == mask {
                            std::mem::swap(&mut lo[k], &mut hi[k]);
                        }
                    }
                });
            }
            Gate::Controlled { control, gate } => {
                self.apply_masked(gate, mask | site_bit(n, *control));
            }
        }
    }

    /// Born probabilities of each bit pattern on `sites`, indexed MSB-first.
    pub fn outcome_probabilities(&self, sites: &[usize]) -> Result<Vec<f64>> {
        self.check_sites(sites)?;
        let mut probs = vec![0.0; 1 << sites.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[self.sub_index(i, sites)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Post-measurement state for a fixed outcome, with the outcome's probability.
    ///
    /// Fails with [`Error::ZeroProbabilityBranch`] when the outcome cannot occur.
    pub fn project(&self, sites: &[usize], bits: &[u8]) -> Result<(StateVector, f64)> {
        self.check_sites(sites)?;
        if bits.len() != sites.len() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(
                "bits must be 0/1, one per measured site".into(),
            ));
        }
        let pattern = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut amps = self.amps.clone();
        let mut p = 0.0;
        for (i, a) in amps.iter_mut().enumerate() {
            if self.sub_index(i, sites) == pattern {
                p += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if p <= 0.0 {
            return Err(Error::ZeroProbabilityBranch);
        }
        let scale = 1.0 / p.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok((
            StateVector {
                num_sites: self.num_sites,
                amps,
            },
            p,
        ))
    }

    /// Samples a projective measurement of `sites` with Born probabilities.
    ///
    /// Draws exactly one value from `rng`.
    pub fn measure_sites(
        &self,
        sites: &[usize],
        rng: &mut RandomStream,
    ) -> Result<MeasurementOutcome> {
        let probs = self.outcome_probabilities(sites)?;
        let u = rng.next_f64();
        let mut acc = 0.0;
        let mut pick = None;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if p > 0.0 && u < acc {
                pick = Some(k);
                break;
            }
        }
        // Rounding can leave `acc` a hair below 1; fall back to the last possible outcome.
        let pattern = match pick {
            Some(k) => k,
            None => probs
                .iter()
                .rposition(|&p| p > 0.0)
                .ok_or(Error::ZeroProbabilityBranch)?,
        };
        let k = sites.len();
        let bits: Vec<u8> = (0..k).map(|j| ((pattern >> (k - 1 - j)) & 1) as u8).collect();
        let (posterior, probability) = self.project(sites, &bits)?;
        Ok(MeasurementOutcome {
            sites: sites.to_vec(),
            bits,
            posterior,
            probability,
        })
    }

    /// Measures whether every listed site is 0 and collapses onto the result.
    ///
    /// Draws exactly one value from `rng`; success iff the draw falls below the
    /// all-zero probability.
    pub fn postselect_zero(&mut self, sites: &[usize], rng: &mut RandomStream) -> Result<ZeroTest> {
        self.check_sites(sites)?;
        let mask = sites
            .iter()
            .fold(0usize, |m, &s| m | site_bit(self.num_sites, s));
        let p_zero: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let success = rng.next_f64() < p_zero;
        let keep = |i: usize| (i & mask == 0) == success;
        let p_kept = if success { p_zero } else { 1.0 - p_zero };
        if p_kept <= 0.0 {
            return Err(Error::ZeroProbabilityBranch);
        }
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if keep(i) {
                norm += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if norm <= 0.0 {
            return Err(Error::ZeroProbabilityBranch);
        }
        let scale = 1.0 / norm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(ZeroTest {
            success,
            probability: p_zero,
        })
    }
}

//! Two-branch representation of cat-state-entangled processors.
//!
//! A state of the form
//!
//! ```text
//! a0 · ⊗_j |0⟩_j |e_j⟩  +  a1 · ⊗_j |1⟩_j |f_j⟩
//! ```
//!
//! is stored as the two branch weights plus, per slot, the local register on
//! each branch (`|e_j⟩`, `|f_j⟩`). Memory and per-operation cost are independent
//! of the number of slots. Only operations that keep this product form are
//! offered: local unitaries conditioned on a slot's own cat bit, branch phase
//! rotations, local all-zero tests, and `M`-then-measure of a cat bit.
//!
//! Local registers are kept normalized; their norms and, for basis states,
//! their phases are folded into the branch weights.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::qsim::{Gate, StateVector, ZeroTest, DEFAULT_MAX_SITES, NORM_TOLERANCE};
use crate::{Error, RandomStream, Result};

/// Minimum overlap between a slot's two local registers before its cat bit may be measured.
pub const DISPOSAL_OVERLAP: f64 = 1.0 - 1e-8;

/// A unitary over one slot's local register.
pub trait LocalUnitary {
    /// Number of local sites the operation needs.
    fn required_sites(&self) -> usize;
    fn apply_to(&self, register: &mut StateVector) -> Result<()>;
    fn elementary_count(&self) -> u64;
}

impl LocalUnitary for Gate {
    fn required_sites(&self) -> usize {
        self.sites().into_iter().max().map_or(0, |m| m + 1)
    }

    fn apply_to(&self, register: &mut StateVector) -> Result<()> {
        register.apply(self)
    }

    fn elementary_count(&self) -> u64 {
        Gate::elementary_count(self)
    }
}

impl LocalUnitary for [Gate] {
    fn required_sites(&self) -> usize {
        self.iter().map(LocalUnitary::required_sites).max().unwrap_or(0)
    }

    fn apply_to(&self, register: &mut StateVector) -> Result<()> {
        register.apply_all(self)
    }

    fn elementary_count(&self) -> u64 {
        self.iter().map(Gate::elementary_count).sum()
    }
}

/// Phase multiplication on the scalar (site-less) local register.
#[derive(Clone, Copy, Debug)]
pub struct ScalarPhase(pub f64);

impl LocalUnitary for ScalarPhase {
    fn required_sites(&self) -> usize {
        0
    }

    fn apply_to(&self, register: &mut StateVector) -> Result<()> {
        register.rotate_basis_phase(0, self.0)
    }

    fn elementary_count(&self) -> u64 {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CatMeasurementRecord {
    pub slot: usize,
    pub bit: u8,
    /// True iff the outcome flipped the sign of branch 1.
    pub sign_flip: bool,
}

#[derive(Clone, Debug, PartialEq)]
struct Slot {
    has_cat: bool,
    attached: bool,
    local: [StateVector; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchPairState {
    weights: [Complex64; 2],
    slots: Vec<Slot>,
    dense_limit: usize,
}

fn scalar_register() -> StateVector {
    StateVector::zero(0).expect("empty register")
}

impl BranchPairState {
    /// `(|0…0⟩ + |1…1⟩)/√2` over `eta` cat bits with empty local registers.
    pub fn new_cat(eta: usize) -> Result<Self> {
        if eta == 0 {
            return Err(Error::EmptyCat);
        }
        let slot = Slot {
            has_cat: true,
            attached: false,
            local: [scalar_register(), scalar_register()],
        };
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Ok(Self {
            weights: [h, h],
            slots: vec![slot; eta],
            dense_limit: DEFAULT_MAX_SITES,
        })
    }

    pub fn eta(&self) -> usize {
        self.slots.len()
    }

    pub fn weights(&self) -> [Complex64; 2] {
        self.weights
    }

    pub fn has_cat_bit(&self, slot: usize) -> Result<bool> {
        Ok(self.slot(slot)?.has_cat)
    }

    pub fn remaining_cat_bits(&self) -> usize {
        self.slots.iter().filter(|s| s.has_cat).count()
    }

    pub fn local(&self, slot: usize, branch: usize) -> Result<&StateVector> {
        check_branch(branch)?;
        Ok(&self.slot(slot)?.local[branch])
    }

    /// Total number of sites in the dense expansion.
    pub fn dense_sites(&self) -> usize {
        self.slots
            .iter()
            .map(|s| s.has_cat as usize + s.local[0].num_sites())
            .sum()
    }

    /// Dense site index of each slot's cat bit (if present) and first local site.
    pub fn dense_layout(&self) -> Vec<(Option<usize>, usize)> {
        let mut next = 0;
        self.slots
            .iter()
            .map(|s| {
                let cat = s.has_cat.then(|| {
                    next += 1;
                    next - 1
                });
                let local = next;
                next += s.local[0].num_sites();
                (cat, local)
            })
            .collect()
    }

    fn slot(&self, slot: usize) -> Result<&Slot> {
        let eta = self.slots.len();
        self.slots.get(slot).ok_or(Error::SlotOutOfRange { slot, eta })
    }

    fn slot_mut(&mut self, slot: usize) -> Result<&mut Slot> {
        let eta = self.slots.len();
        self.slots
            .get_mut(slot)
            .ok_or(Error::SlotOutOfRange { slot, eta })
    }

    /// Gives `slot` an all-zero local register of `num_local_sites` on both branches.
    pub fn attach_local_register(&mut self, slot: usize, num_local_sites: usize) -> Result<()> {
        let s = self.slot_mut(slot)?;
        if s.attached {
            return Err(Error::RegisterAlreadyAttached(slot));
        }
        let zero = StateVector::zero(num_local_sites)?;
        s.local = [zero.clone(), zero];
        s.attached = true;
        Ok(())
    }

    /// Applies `op` to `slot`'s register on one branch only.
    pub fn apply_local_on_branch<U: LocalUnitary + ?Sized>(
        &mut self,
        slot: usize,
        branch: usize,
        op: &U,
    ) -> Result<()> {
        check_branch(branch)?;
        let s = self.slot_mut(slot)?;
        if !s.has_cat {
            return Err(Error::SlotMeasured(slot));
        }
        let available = s.local[branch].num_sites();
        let needed = op.required_sites();
        if needed > available {
            return Err(Error::ForeignSites { needed, available });
        }
        op.apply_to(&mut s.local[branch])?;
        self.fold(slot, branch);
        self.check_norm()
    }

    /// Multiplies branch weight `branch` by `e^{i·angle}`.
    pub fn rotate_branch_phase(&mut self, branch: usize, angle: f64) -> Result<()> {
        check_branch(branch)?;
        self.weights[branch] *= Complex64::from_polar(1.0, angle);
        Ok(())
    }

    /// Binary measurement "is `slot`'s local register all zero?".
    ///
    /// Requires the branches to be orthogonal (some cat bit still present).
    /// Draws exactly one value from `rng`.
    pub fn postselect_local_zero(&mut self, slot: usize, rng: &mut RandomStream) -> Result<ZeroTest> {
        if self.remaining_cat_bits() == 0 {
            return Err(Error::LastCatBit(slot));
        }
        let s = self.slot(slot)?;
        let zero = |b: usize| s.local[b].amplitudes()[0].norm_sqr();
        // The nonzero part is summed directly: `1 − p_zero` would cancel when failure is rare.
        let rest = |b: usize| s.local[b].amplitudes()[1..].iter().map(|a| a.norm_sqr()).sum::<f64>();
        let w = [self.weights[0].norm_sqr(), self.weights[1].norm_sqr()];
        let p_zero = w[0] * zero(0) + w[1] * zero(1);
        let p_rest = w[0] * rest(0) + w[1] * rest(1);
        let success = rng.next_f64() < p_zero;
        let p_kept = if success { p_zero } else { p_rest };
        if p_kept <= 0.0 {
            return Err(Error::ZeroProbabilityBranch);
        }
        let scale = 1.0 / p_kept.sqrt();
        for b in 0..2 {
            let reg = &mut self.slots[slot].local[b];
            let amps = reg.amplitudes_mut();
            if success {
                amps[1..].iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            } else {
                amps[0] = Complex64::new(0.0, 0.0);
            }
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                amps.iter_mut().for_each(|a| *a /= norm);
                self.weights[b] *= norm * scale;
                self.fold(slot, b);
            } else {
                // Branch carries no weight on this outcome; keep a valid register.
                self.weights[b] = Complex64::new(0.0, 0.0);
                self.slots[slot].local[b] = StateVector::basis(
                    self.slots[slot].local[b].num_sites(),
                    if success { 0 } else { 1.min(self.slots[slot].local[b].dim() - 1) },
                )?;
            }
        }
        self.check_norm()?;
        Ok(ZeroTest {
            success,
            probability: p_zero,
        })
    }

    /// Applies `M` to `slot`'s cat bit and measures it (one draw from `rng`).
    ///
    /// Outcome 0 leaves the weights unchanged; outcome 1 negates branch 1.
    /// The slot's local registers must agree across branches.
    pub fn m_and_measure_cat_bit(
        &mut self,
        slot: usize,
        rng: &mut RandomStream,
    ) -> Result<CatMeasurementRecord> {
        self.prepare_cat_measurement(slot)?;
        let bit = u8::from(rng.next_f64() >= 0.5);
        self.finish_cat_measurement(slot, bit)
    }

    /// As [`Self::m_and_measure_cat_bit`] with the outcome forced to `bit`.
    ///
    /// Returns the record and the outcome's probability (always ½ while another
    /// cat bit remains).
    pub fn project_cat_bit(&mut self, slot: usize, bit: u8) -> Result<(CatMeasurementRecord, f64)> {
        if bit > 1 {
            return Err(Error::InvalidParameter(format!("bit {bit}")));
        }
        self.prepare_cat_measurement(slot)?;
        Ok((self.finish_cat_measurement(slot, bit)?, 0.5))
    }

    fn prepare_cat_measurement(&mut self, slot: usize) -> Result<()> {
        let s = self.slot(slot)?;
        if !s.has_cat {
            return Err(Error::SlotMeasured(slot));
        }
        if self.remaining_cat_bits() < 2 {
            return Err(Error::LastCatBit(slot));
        }
        let overlap = s.local[0].inner(&s.local[1]);
        let mag = overlap.norm();
        if mag < DISPOSAL_OVERLAP {
            return Err(Error::RegistersEntangled { slot, overlap: mag });
        }
        let phase = overlap / mag;
        self.weights[1] *= phase;
        let s = self.slot_mut(slot)?;
        s.local[1] = s.local[0].clone();
        Ok(())
    }

    fn finish_cat_measurement(&mut self, slot: usize, bit: u8) -> Result<CatMeasurementRecord> {
        // Other cat bits keep the branches orthogonal, so after M each outcome
        // has probability ½ and the weights survive up to the sign of branch 1.
        if bit == 1 {
            self.weights[1] = -self.weights[1];
        }
        self.slots[slot].has_cat = false;
        self.check_norm()?;
        Ok(CatMeasurementRecord {
            slot,
            bit,
            sign_flip: bit == 1,
        })
    }

    /// The remaining single cat bit as a one-site state `a0|0⟩ + a1|1⟩`.
    ///
    /// Every local register must agree across branches.
    pub fn final_qubit(&self) -> Result<StateVector> {
        if self.remaining_cat_bits() != 1 {
            return Err(Error::InvalidParameter(format!(
                "final qubit needs exactly one cat bit, {} remain",
                self.remaining_cat_bits()
            )));
        }
        let mut overlap = Complex64::new(1.0, 0.0);
        for (j, s) in self.slots.iter().enumerate() {
            let o = s.local[0].inner(&s.local[1]);
            if o.norm() < DISPOSAL_OVERLAP {
                return Err(Error::RegistersEntangled {
                    slot: j,
                    overlap: o.norm(),
                });
            }
            overlap *= o / o.norm();
        }
        StateVector::from_amplitudes(vec![self.weights[0], self.weights[1] * overlap])
    }

    /// Exact dense expansion; slots in order, each as `[cat bit] local sites`.
    pub fn to_dense(&self) -> Result<StateVector> {
        let total = self.dense_sites();
        if total > self.dense_limit {
            return Err(Error::TooManySites {
                requested: total,
                limit: self.dense_limit,
            });
        }
        let mut branches = Vec::with_capacity(2);
        for b in 0..2 {
            let mut v = scalar_register();
            for s in &self.slots {
                if s.has_cat {
                    v = v.tensor(&StateVector::basis(1, b)?)?;
                }
                v = v.tensor(&s.local[b])?;
            }
            branches.push(v);
        }
        let amps = branches[0]
            .amplitudes()
            .iter()
            .zip(branches[1].amplitudes())
            .map(|(x, y)| self.weights[0] * x + self.weights[1] * y)
            .collect();
        StateVector::from_amplitudes(amps)
    }

    pub fn check_norm(&self) -> Result<()> {
        let norm = (self.weights[0].norm_sqr() + self.weights[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NormViolation(norm));
        }
        Ok(())
    }

    /// Renormalizes a local register into its branch weight.
    fn fold(&mut self, slot: usize, branch: usize) {
        let reg = &mut self.slots[slot].local[branch];
        let amps = reg.amplitudes_mut();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 && norm != 1.0 {
            amps.iter_mut().for_each(|a| *a /= norm);
            self.weights[branch] *= norm;
        }
        let mut nonzero = amps.iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0);
        if let (Some((k, a)), None) = (nonzero.next(), nonzero.next()) {
            let phase = a / a.norm();
            self.weights[branch] *= phase;
            amps[k] = Complex64::new(1.0, 0.0);
        }
    }
}

fn check_branch(branch: usize) -> Result<()> {
    if branch < 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("branch {branch} (expected 0 or 1)")))
    }
}

//! Full state-vector references for the distributed protocols.
//!
//! Layouts match [`BranchPairState::to_dense`](crate::branch::BranchPairState::to_dense):
//! slot by slot, each as its cat bit followed by its local sites. Random draws
//! are consumed in the same order as the branch-pair implementations.

use std::f64::consts::PI;

use super::{DistributedProtocol, EprProtocol, Outcomes};
use crate::kick::kick_iteration;
use crate::qsim::{Gate, StateVector};
use crate::{Error, RandomStream, Result};

/// Site layout of one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotSites {
    pub cat: usize,
    pub local: Vec<usize>,
}

fn layout(local_sizes: &[usize]) -> Vec<SlotSites> {
    let mut next = 0;
    local_sizes
        .iter()
        .map(|&n| {
            let s = SlotSites {
                cat: next,
                local: (next + 1..=next + n).collect(),
            };
            next += n + 1;
            s
        })
        .collect()
}

fn cat_state(slots: &[SlotSites]) -> Result<StateVector> {
    let total = slots.last().map_or(0, |s| s.cat + s.local.len() + 1);
    let mut state = StateVector::zero(total)?;
    state.apply_m(slots[0].cat)?;
    for s in &slots[1..] {
        state.apply_cnot(slots[0].cat, s.cat)?;
    }
    Ok(state)
}

/// Measures the cat bits of slots `order` after `M`, applies the parity
/// correction on slot 0, and returns slot 0's cat bit as a qubit.
fn collapse(
    mut state: StateVector,
    slots: &[SlotSites],
    order: &[usize],
    outcomes: Outcomes<'_>,
    rng: &mut RandomStream,
) -> Result<StateVector> {
    let mut bits = vec![0u8; slots.len()];
    for (k, &id) in order.iter().enumerate() {
        let cat = slots[id].cat;
        state.apply_m(cat)?;
        let bit = match outcomes {
            Outcomes::Sampled => {
                let m = state.measure_sites(&[cat], rng)?;
                state = m.posterior;
                m.bits[0]
            }
            Outcomes::Forced(forced) => {
                let b = *forced
                    .get(k)
                    .ok_or_else(|| Error::InvalidParameter("too few forced outcomes".into()))?;
                state = state.project(&[cat], &[b])?.0;
                b
            }
        };
        bits[id] = bit;
    }
    if bits.iter().fold(0, |a, b| a ^ b) == 1 {
        state.apply(&Gate::basis_phase(vec![slots[0].cat], 1, PI))?;
    }
    let n = state.num_sites();
    let index = |b0: u8| {
        slots
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let bit = if j == 0 { b0 } else { bits[j] };
                (bit as usize) << (n - 1 - s.cat)
            })
            .sum::<usize>()
    };
    let c0 = state.amplitude(index(0))?;
    let c1 = state.amplitude(index(1))?;
    StateVector::from_amplitudes(vec![c0, c1])
}

/// Dense run of the one-shot protocol; returns the base station's qubit.
pub fn epr_dense(
    protocol: &EprProtocol,
    outcomes: Outcomes<'_>,
    order: Option<&[usize]>,
    rng: &mut RandomStream,
) -> Result<StateVector> {
    let n = protocol.nodes().len();
    let slots = layout(&vec![0; n]);
    let mut state = cat_state(&slots)?;
    for j in 0..n {
        state.apply(&Gate::basis_phase(vec![slots[j].cat], 0, protocol.angle(j)))?;
    }
    let id_order: Vec<usize> = (1..n).collect();
    collapse(state, &slots, order.unwrap_or(&id_order), outcomes, rng)
}

/// Dense version of [`DistributedProtocol::accumulate`]: the full register
/// before any cat bit is measured, and the restart count.
pub fn distributed_dense_accumulate(protocol: &DistributedProtocol, rng: &mut RandomStream) -> Result<(StateVector, u64)> {
    let kernels = protocol.kernels();
    let sizes: Vec<usize> = kernels.iter().map(|k| k.num_sites()).collect();
    let slots = layout(&sizes);
    let mut restarts = 0;
    'attempt: loop {
        let mut state = cat_state(&slots)?;
        for _ in 0..protocol.r() {
            for (s, k) in slots.iter().zip(kernels) {
                kick_iteration(&mut state, s.cat, &s.local, k, false)?;
                if !state.postselect_zero(&s.local, rng)?.success {
                    restarts += 1;
                    continue 'attempt;
                }
            }
        }
        return Ok((state, restarts));
    }
}

/// Dense version of [`DistributedProtocol::prepare`]; returns the base station's qubit.
pub fn distributed_dense(
    protocol: &DistributedProtocol,
    outcomes: Outcomes<'_>,
    order: Option<&[usize]>,
    rng: &mut RandomStream,
) -> Result<(StateVector, u64)> {
    let sizes: Vec<usize> = protocol.kernels().iter().map(|k| k.num_sites()).collect();
    let slots = layout(&sizes);
    let (state, restarts) = distributed_dense_accumulate(protocol, rng)?;
    let id_order: Vec<usize> = (1..slots.len()).collect();
    Ok((collapse(state, &slots, order.unwrap_or(&id_order), outcomes, rng)?, restarts))
}

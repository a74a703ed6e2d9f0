//! Distributed protocols over a simulated message-passing network.
//!
//! Processors share one cat state, held as a [`BranchPairState`] with one slot
//! per processor. Each processor does unitary work on its own slot. It then
//! applies `M` to its cat bit, measures it and sends that single bit to the
//! base station (processor 0). The base XORs the bits and, on odd parity,
//! negates branch 1 of its remaining cat bit. The result is a single known
//! qubit whose relative phase is the sum of the branch phases written by all
//! processors.
//!
//! Processors run in id order within a round. Measurement randomness comes
//! from one per-round stream, drawn in that order.

mod bound;
pub mod dense;
mod distributed;
mod epr;
mod ladder;
mod xor;

pub use bound::{calibrate_failure_constant, eta_bound, eta_budget_coeff, FailureCalibration, ATTEMPT_FAILURE_TARGET};
pub use distributed::{run_distributed_estimator, DistributedConfig, DistributedProtocol, CALIBRATION_THETAS};
pub use epr::{epr_prepare, run_epr_mean_protocol, EprProtocol};
pub use ladder::{cnot_doubling_ladder, pair_and_double, phase_qubit, LadderLevel, LadderReport};
pub use xor::{xor_aggregate, XorTree};

use serde::{Deserialize, Serialize};

use crate::branch::BranchPairState;
use crate::dataset::Dataset;
use crate::{Error, RandomStream, Result};

/// One processor's share of a protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessorNode {
    pub id: usize,
    /// The data this processor sees: the full dataset or a shard of it.
    pub view: Dataset,
    /// Cat-state slot owned by this processor (equal to `id`).
    pub slot: usize,
    pub theta: f64,
    pub r: u64,
}

/// A one-bit result sent from a processor to the base station.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub from: usize,
    pub bit: u8,
    pub round: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    /// A processor's result bit sent to the base station.
    Bit,
    /// A failed all-zero test at `from`; every processor starts over.
    Restart,
    /// The base station's readout measurement of the final qubit.
    Measure,
}

/// One line of a network trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub event: EventKind,
    pub from: usize,
    pub round: u64,
    /// Message or measurement bit; `null` for restarts.
    pub bit: Option<u8>,
}

impl TraceEvent {
    pub fn message(msg: ClassicalMessage) -> Self {
        Self {
            event: EventKind::Bit,
            from: msg.from,
            round: msg.round,
            bit: Some(msg.bit),
        }
    }

    pub fn restart(from: usize, round: u64) -> Self {
        Self {
            event: EventKind::Restart,
            from,
            round,
            bit: None,
        }
    }

    pub fn measure(from: usize, round: u64, bit: u8) -> Self {
        Self {
            event: EventKind::Measure,
            from,
            round,
            bit: Some(bit),
        }
    }
}

/// Ordered log of messages and protocol events.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NetworkTrace {
    pub events: Vec<TraceEvent>,
}

impl NetworkTrace {
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn extend(&mut self, other: NetworkTrace) {
        self.events.extend(other.events);
    }

    /// Result-bit messages only; restarts and readout events are excluded.
    pub fn messages(&self) -> impl Iterator<Item = ClassicalMessage> + '_ {
        self.events.iter().filter(|e| e.event == EventKind::Bit).map(|e| ClassicalMessage {
            from: e.from,
            bit: e.bit.unwrap_or(0),
            round: e.round,
        })
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.event == kind).count()
    }

    /// One JSON object per line, newline-terminated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events are plain data"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::InvalidParameter(format!("trace line: {e}"))))
            .collect::<Result<_>>()?;
        Ok(Self { events })
    }
}

/// What the base station has received in one round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BaseStationState {
    pub received: Vec<ClassicalMessage>,
    parity: u8,
}

impl BaseStationState {
    pub fn receive(&mut self, msg: ClassicalMessage) {
        self.parity ^= msg.bit;
        self.received.push(msg);
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    /// Sign `(−1)^parity` applied to branch 1 of the final qubit.
    pub fn sign(&self) -> f64 {
        if self.parity == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// How cat-bit measurement outcomes are chosen.
#[derive(Clone, Copy, Debug)]
pub enum Outcomes<'a> {
    /// Sampled from the round stream.
    Sampled,
    /// Forced; entry `k` is the outcome of the `k`-th non-base processor measured.
    Forced(&'a [u8]),
}

/// `M` plus measurement of `node`'s cat bit, producing its one-bit message.
///
/// With `forced`, the outcome is set instead of drawn.
pub fn processor_local_step(
    node: &ProcessorNode,
    state: &mut BranchPairState,
    forced: Option<u8>,
    rng: &mut RandomStream,
    round: u64,
) -> Result<ClassicalMessage> {
    let record = match forced {
        Some(bit) => state.project_cat_bit(node.slot, bit)?.0,
        None => state.m_and_measure_cat_bit(node.slot, rng)?,
    };
    Ok(ClassicalMessage {
        from: node.id,
        bit: record.bit,
        round,
    })
}

/// Result of collapsing a cat state onto the base station.
#[derive(Clone, Debug)]
pub struct Collapse {
    pub base: BaseStationState,
    /// Gates spent: one `M` per measured processor plus the parity correction.
    pub elementary_steps: u64,
}

/// Measures every non-base processor in `order`, sends the bits, and applies
/// the parity correction at the base. `order` lists node indices, excluding 0.
pub fn collapse_to_base(
    nodes: &[ProcessorNode],
    order: &[usize],
    state: &mut BranchPairState,
    outcomes: Outcomes<'_>,
    rng: &mut RandomStream,
    round: u64,
    trace: &mut NetworkTrace,
) -> Result<Collapse> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..nodes.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter(format!("measurement order {order:?} must permute 1..{}", nodes.len())));
    }
    if let Outcomes::Forced(bits) = outcomes {
        if bits.len() != order.len() {
            return Err(Error::InvalidParameter(format!(
                "{} forced outcomes for {} processors",
                bits.len(),
                order.len()
            )));
        }
    }
    let mut base = BaseStationState::default();
    let mut steps = 0;
    for (k, &id) in order.iter().enumerate() {
        let forced = match outcomes {
            Outcomes::Sampled => None,
            Outcomes::Forced(bits) => Some(bits[k]),
        };
        let msg = processor_local_step(&nodes[id], state, forced, rng, round)?;
        steps += 1;
        trace.push(TraceEvent::message(msg));
        base.receive(msg);
    }
    if base.parity() == 1 {
        state.rotate_branch_phase(1, std::f64::consts::PI)?;
        steps += 1;
    }
    Ok(Collapse {
        base,
        elementary_steps: steps,
    })
}

/// Protocol configuration as accepted from a JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub theta: f64,
    #[serde(default = "one")]
    pub eta: usize,
    #[serde(default)]
    pub r: Option<u64>,
    #[serde(default = "default_alpha")]
    pub alpha: u64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Allows `eta` above the processor bound.
    #[serde(default)]
    pub force: bool,
    /// Gives each processor a shard of the data instead of all of it.
    #[serde(default)]
    pub shard: bool,
}

fn one() -> usize {
    1
}

fn default_alpha() -> u64 {
    crate::kick::KickParams::default().alpha
}

//! Exact desk-scale simulation of phase-kick quantum mean estimation.
//!
//! The crate is organised bottom-up:
//!
//! * [`qsim`]: dense state vectors over two-state sites with the `M` (Hadamard)
//!   gate, Walsh-Hadamard transforms, diagonal phase rotations, CNOT, controlled
//!   operations and projective measurement.
//! * [`branch`]: a two-branch (cat-state) representation that scales linearly in
//!   the number of processors.
//! * [`kick`]: the serial estimator: the seven-step kick iteration, post-selection
//!   with restart, interference readout, the θ-reduction schedule and a closed-form
//!   amplitude oracle.
//! * [`telecompute`]: the cat-state one-bit protocols, XOR aggregation, the
//!   CNOT phase-doubling ladder and the processor-count bound.
//! * [`baseline`]: classical sampling for comparison.
//! * [`sweep`]: θ/η sweeps with log-log fits.
//!
//! With the default `parallel` feature, independent trials and large gate
//! applications run on rayon. Results are bitwise identical with the feature off.

pub mod baseline;
pub mod branch;
pub mod dataset;
mod error;
pub mod fit;
pub mod kick;
pub mod par;
pub mod qsim;
pub mod report;
pub mod rng;
pub mod sweep;
pub mod telecompute;

pub use error::{Error, Result};
pub use rng::RandomStream;

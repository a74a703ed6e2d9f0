use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for a register of {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },
    #[error("duplicate site {0}")]
    DuplicateSite(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("control site {0} overlaps the sites acted on by the controlled operation")]
    ControlOverlap(usize),
    #[error("register of {requested} sites exceeds the limit of {limit}")]
    TooManySites { requested: usize, limit: usize },
    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),
    #[error("norm drifted to {0} (expected 1)")]
    NormViolation(f64),
    #[error("sampled a zero-probability measurement branch")]
    ZeroProbabilityBranch,
    #[error("slot {slot} out of range for {eta} slots")]
    SlotOutOfRange { slot: usize, eta: usize },
    #[error("slot {0} already has a local register")]
    RegisterAlreadyAttached(usize),
    #[error("slot {0} has already been measured")]
    SlotMeasured(usize),
    #[error("slot {0} is the last remaining cat bit; read it out instead")]
    LastCatBit(usize),
    #[error("local registers of slot {slot} differ across branches (overlap {overlap})")]
    RegistersEntangled { slot: usize, overlap: f64 },
    #[error("operation acts on {needed} sites but the local register has {available}")]
    ForeignSites { needed: usize, available: usize },
    #[error("cat state needs at least one slot")]
    EmptyCat,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {0} outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("data register not in the all-zero state at iteration entry (residual {0:e})")]
    DataRegisterNotClear(f64),
    #[error("restart cap of {0} exceeded")]
    RestartCapExceeded(u64),
    #[error("signal phase {phase} outside the unwrap window ±{limit}; reduce r")]
    PhaseWindowExceeded { phase: f64, limit: f64 },
    #[error("processor count {eta} exceeds the bound {bound}")]
    EtaBoundExceeded { eta: usize, bound: usize },
    #[error("malformed XOR grouping: {0}")]
    MalformedGrouping(String),
    #[error("degenerate sweep: {0}")]
    DegenerateSweep(String),
}

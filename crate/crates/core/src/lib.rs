//! Exact population-level simulator for two-stroke quantum refrigerators
//! whose working body is a d-level catalyst coupled to a hot and a cold
//! two-level system.
//!
//! Stroke 1 permutes joint populations (a basis permutation unitary), stroke 2
//! rethermalizes the two TLS with their baths. Everything here is exact dense
//! arithmetic on population vectors of length 4d; there is no sampling and no
//! truncation, so energy bookkeeping identities hold to rounding error.
//!
//! Basis convention used throughout: `idx(m, j, k) = 4(m-1) + 2j + k` with
//! catalyst level m = 1..d slowest, hot bit j next, cold bit k fastest.

pub mod catalyst;
pub mod model;
pub mod permutations;
pub mod regions;
pub mod search;
pub mod thermo;
pub mod verify;

pub use catalyst::{FlowReport, NodeTransfer, StationarySolution, TransferMatrix};
pub use model::{CatalystDistribution, EnergyVectors, GibbsWeights, JointState, MachineSpec};
pub use permutations::{BistochasticMatrix, ConvexMixture, Permutation};
pub use regions::{CopCurvePoint, RegionPoint};
pub use search::{BoundOutcome, ConvexBoundResult, SearchResult, SearchRow};
pub use thermo::{EnergyFlows, Mode};

/// Tolerance used for tie decisions on work and for flow-uniformity checks.
pub const TIE_TOL: f64 = 1e-12;

/// Errors produced by the simulator and search layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid permutation map: {0}")]
    InvalidPermutation(String),
    #[error("invalid machine parameter: {0}")]
    InvalidSpec(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration over dimension {dim} exceeds the cap of {cap}")]
    EnumerationCap { dim: usize, cap: usize },
    #[error("matrix is not bistochastic: {0}")]
    NotBistochastic(String),
    #[error("permutation has a cycle longer than 2: {0}")]
    NotInvolution(String),
    #[error("stationary solve did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("Carnot COP undefined: beta_c must exceed beta_h")]
    CarnotUndefined,
}

pub type Result<T> = std::result::Result<T, Error>;

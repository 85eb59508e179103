//! Reduced-order modelling of Bingham duct flow.
//!
//! The full-order model solves the dimensionless Mosolov problem
//!
//! ```text
//! -Δu - B ∇·(∇u / |∇u|) = 1 in Ω,   u = 0 on ∂Ω
//! ```
//!
//! with P1 velocity / P0 gradient finite elements and the ALG2
//! augmented-Lagrangian iteration ([`alg2`]). Solutions over sampled Bingham
//! numbers ([`snapshots`]) are compressed by proper orthogonal decomposition
//! ([`pod`]) and a small feedforward network ([`ann`]) maps parameters to POD
//! coefficients. [`rom`] composes the two into a fast surrogate.

pub mod alg2;
pub mod ann;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod pod;
pub mod rom;
pub mod snapshots;

pub use alg2::{solve_mosolov, Alg2Config, Alg2Result, YieldField};
pub use ann::{Dataset, MlpModel, Normalization, TrainConfig, TrainedNetwork};
pub use fem::{P0VectorField, P1Field, SparseSpdMatrix};
pub use mesh::{generate_mesh, DomainSpec, Mesh, Shape};
pub use pod::PodBasis;
pub use rom::{FitSettings, PhysicalParams, ReducedModel};
pub use snapshots::{ParameterBounds, SnapshotSet};

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("linear solver failed after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("fingerprint mismatch for {artifact}: expected {expected}, found {found}")]
    FingerprintMismatch { artifact: String, expected: String, found: String },
    #[error("no converged snapshots")]
    NoConvergedSnapshots,
    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, message: msg.into() }
    }

    pub(crate) fn dims(what: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { what, expected, found }
    }
}

/// First 16 hex digits of the SHA-256 digest of `bytes`.
pub fn fingerprint(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: expected {expected} values, got {actual}")]
    InvalidShape { expected: usize, actual: usize },
    #[error("grids are not compatible for spectral transfer: {0}")]
    GridMismatch(String),
    #[error("non-finite coefficients at t = {t} (eps = {eps})")]
    NonFinite { t: f64, eps: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trajectory carries no energy ledger")]
    LedgerMissing,
    #[error("snapshot times of the two trajectories do not match at index {index}")]
    TimeMismatch { index: usize },
    #[error("initial relative energy {value:e} exceeds tolerance {tol:e}")]
    InitialMismatch { value: f64, tol: f64 },
    #[error("test field {index} is not divergence-free (relative divergence {ratio:e})")]
    TestFieldNotDivergenceFree { index: usize, ratio: f64 },
    #[error("dense budget exceeded: {nodes} nodes (limit {limit})")]
    BudgetExceeded { nodes: usize, limit: usize },
    #[error("discrete divergence-free space has dimension {available}, requested {requested}")]
    NullspaceDeficient { available: usize, requested: usize },
    #[error("unknown initial-data generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad snapshot magic")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    VersionUnsupported(u32),
    #[error("snapshot payload truncated")]
    TruncatedPayload,
    #[error(transparent)]
    Io(#[from] io::Error),
}

//! Scenarios, binary snapshots and CSV output.

pub mod csv;
mod scenario;
mod snapshot;

pub use scenario::{make_initial, taylor_green, GeneratorParams, Scenario, GENERATORS};
pub use snapshot::{
    basis_bytes, basis_from_bytes, load_basis, load_snapshot, save_basis, save_snapshot,
    snapshot_bytes, snapshot_from_bytes, BASIS_MAGIC, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};

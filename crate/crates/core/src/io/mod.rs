//! Configuration, snapshots and the ledger.

pub mod config;
pub mod ledger;
pub mod snapshot;

pub use config::SimConfig;
pub use ledger::{read_ledger, LedgerWriter};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};

//! Run configuration, experiment orchestration and serialization.

pub mod config;
pub mod run;
pub mod snapshot;

pub use config::{parse_config, Experiment, RunConfig};
pub use run::{run, RunSummary};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};

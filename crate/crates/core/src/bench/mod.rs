//! Benchmark harness, GPU occupancy model, interaction-range memory
//! estimator and the snapshot and stats file formats.

mod harness;
mod memory;
mod occupancy;
mod snapshot;
mod stats;

pub use harness::{run_benchmark, BenchOptions, BenchReport, BenchRow};
pub use memory::{device_memory_limit, estimate_range_memory, ranges_per_cell, subdivided_cells};
pub use occupancy::{best_block_size, blocks_per_sm, occupancy, Capability, DeviceSpec, WARP_SIZE};
pub use snapshot::{compare_snapshots, CompareReport, FieldDiff, Snapshot, SnapshotRow, Tolerances, SNAPSHOT_HEADER};
pub use stats::{read_stats, write_stats, StatsLine};

//! Seeded experiment drivers: scaling scans, row emission and claim sweeps.

mod scan;
mod spec;
mod verify;

pub use scan::{emit, emit_to_writer, read_rows_json, run_experiment, ScalingRow, CSV_HEADER};
pub use spec::{build_policy, ExperimentSpec, OutputFormat, PolicyKind, PolicyParams};
pub use verify::{cli_verify, verify_policy, VerifyOptions, VerifyReport};

//! Figure-scale experiment sweeps: configuration, deterministic parallel
//! execution, CSV/JSON output and the circuit verification suite.

pub mod config;
pub mod report;
pub mod sweep;
pub mod verify;

pub use config::{Experiment, Preset, RSpec, SweepConfig, DEFAULT_SEED};
pub use report::{calibrations_json, csv_string, write_calibrations, write_csv, write_report, CSV_HEADER};
pub use sweep::{
    load_calibrations, run_calibration, run_sweep, Correction, ReportMetadata, SweepReport,
};
pub use verify::{run_verify_circuit, VerifyConfig, VerifyReport, VERIFY_TOLERANCE};

//! Experiments, reproducible randomness, file formats and the aggregated
//! verification report.

pub mod config;
pub mod convergence;
pub mod crystal;
pub mod io;
pub mod rng;
pub mod verify;

pub use config::ConfigFile;
pub use convergence::{
    convergence_study, manufactured_error, ConvergenceRow, ConvergenceSetup, ManufacturedSolution,
};
pub use crystal::{crystal_growth, GrowthOutput, GrowthSetup, NucleationSpec, Patch};
pub use io::{csv_string, read_snapshot, write_csv, write_snapshot};
pub use rng::SplitMix64;
pub use verify::{verify_all, CheckResult, Fault, Outcome, VerifyOptions, VerifyReport};

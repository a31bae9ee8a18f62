//! Batch front end for the cwvsmix sampler: CSV ingestion, subcommands and
//! deterministic result files. Periods are 1-based in every file.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod output;

pub use commands::{benchmark, diagnose, fit, load_scenario, simulate, BenchmarkArgs, DiagnoseArgs, FitArgs, SimulateArgs};
pub use error::{CliError, Result};
pub use ingest::{ingest_csv, read_dataset, write_dataset_csv};

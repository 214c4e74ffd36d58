//! Batch front end: configuration parsing and run orchestration.

mod config;
mod run;

pub use config::{parse_config, render_config, MmsSelector, Mode, RunConfig};
pub use run::{run, study_csv, write_atomic, RunOutcome, EOC_SLACK, MASS_AUDIT_TOL, TAU_HALVING_TOL};

//! Replicate ensembles: configuration, seeding, execution and persistence.
//!
//! Every random draw of a record traces to `(seed, replicate, M, stage)`
//! through [`child_seed`] and [`stage_seed`], so any record can be
//! regenerated on its own with [`Experiment::rerun`].

mod config;
mod io;
mod record;
mod run;
mod summary;

pub use config::{EpsilonSpec, ExperimentConfig, MethodSpec, MAX_SAMPLES, WORKERS_ENV};
pub use io::{
    read_records, read_summary, write_coefficients, write_records, write_summary, Format,
    COEFFICIENT_COLUMNS, RECORD_COLUMNS, SUMMARY_COLUMNS,
};
pub use record::{RecordStatus, ResultRecord};
pub use run::{
    child_seed, problem_listing, run_experiment, stage_seed, worker_pool, CoefficientRow,
    Experiment, Stage,
};
pub use summary::{summarize, SummaryRow};

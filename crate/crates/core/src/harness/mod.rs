//! Experiment configuration, sequential runs, suites and result persistence.

mod config;
mod experiment;
mod plot;
mod store;
mod suite;

pub use config::{
    full_grid_methods, DatasetSource, ExperimentConfig, GridSpec, Method,
    DEFAULT_EWC_REPLAY_LAMBDA, REPORTING_SEEDS,
};
pub use experiment::{run_experiment, run_experiment_on, ForgettingRecord, ResultsRecord, Timings};
pub use plot::emit_plot_data;
pub use store::ResultStore;
pub use suite::{mean_std, run_suite, run_suite_cached, FailureRecord, SuiteSummary, SummaryRow};

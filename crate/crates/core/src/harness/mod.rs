//! Experiment runner: configuration, end-to-end runs and metrics output.

mod config;
mod experiment;
mod metrics;

pub use config::{
    parse_config, parse_config_text, Algorithm, DatasetKind, ExperimentConfig, ModelKind, KEYS,
    PRESETS,
};
pub use experiment::{
    load_datasets, model_spec, partition_for, run_experiment, run_with_data, run_with_observer,
    training_subset,
};
pub use metrics::{
    format_sig9, group_runs, metrics_csv, parse_metrics, read_metrics, summarize, write_metrics,
    RoundRecord, Summary, ACCURACY_THRESHOLDS, CSV_HEADER,
};

//! Experiment configs, the evaluation pipeline and error metrics.

pub mod config;
pub mod data;
pub mod metrics;
pub mod pipeline;

pub use config::{ExperimentConfig, GanSettings, InstrumentKind, McDrift, ModelKind};
pub use data::{load_option_quotes, write_option_quotes, OptionQuote, OPTION_HEADER};
pub use metrics::{ape, mape};
pub use pipeline::{
    fit_generator, generate_tracks, load_dataset, metadata_path, price_commodity_now, price_equity_futures_now,
    price_option_now, price_with_source, run_pipeline, run_pipeline_with, selected_tracks, snap_horizon,
    training_history, Contracts, Dataset, EvalReport, GanSource, GbmSource, Predictions, PricingContext, ReportRow,
    SamplerSource,
};

//! Experiment driver: configuration, evaluation, scatter output and the
//! end-to-end pipeline.

pub mod config;
pub mod eval;
pub mod pipeline;
pub mod plot;

pub use config::{OpticsParams, RunConfig, SEED_ENV};
pub use eval::{argmax_accuracy, evaluate, rms_error, EvalRecord, EvalReport};
pub use pipeline::{run_pipeline, Manifest, RunOutcome, REFERENCE_RMS_NM};
pub use plot::{emit_scatter, scatter_csv, scatter_svg, ScatterFiles};

//! Reproducible experiment presets with CSV output.
//!
//! Every CSV starts with a `#` comment block holding the crate version and
//! the fully resolved configuration, so a result file is enough to rerun the
//! experiment that produced it.

pub mod config;
pub mod runners;

pub use config::{ExperimentConfig, ExperimentKind, SweepAxes};
pub use runners::{
    run, run_calibrate, run_fig3, run_fig4, run_fig5, run_optimize, run_single, ExperimentOutput, VERSION,
};

//! Monte-Carlo SNR sweeps: per-frame pipeline, counter aggregation, CSV and
//! SVG emission.

pub mod config;
pub mod frame;
pub mod output;
pub mod sweep;

pub use config::SimConfig;
pub use output::{emit_csv, emit_plot, load_csv};
pub use sweep::{run_sweep, SweepResult, SweepRow};

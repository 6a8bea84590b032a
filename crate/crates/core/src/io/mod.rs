//! Configuration files, the result store and plot-data emission.

pub mod config;
pub mod plot;
pub mod store;

pub use config::{apply_tolerance_overrides, parse_config, ExperimentConfig};
pub use plot::{emit_plot_data, PlotKind};
pub use store::ResultStore;

//! Experiment orchestration: sweep configs, sweeps over magnitude grids,
//! metrics, the IQ-style score mapping and CSV/SVG reports.

mod config;
mod iq;
mod metrics;
mod report;
mod sweep;

pub use config::{
    noise_grid_default, DataOptions, DataSource, DatasetRef, ErosionTemplate, InlineTrain, ModelRef, SweepConfig,
    TrainFile, ABLATION_SIGMA, BINARY_CHANCE,
};
pub use iq::{iq_score, IqSectionResult, QUANT_ITEMS, VERBAL_ITEMS};
pub use metrics::{detect_dropoff, dropoff_from_means, label_divergence, mean_and_sem};
pub use report::{render_csv, render_svg, write_report, CSV_FILE, CSV_HEADER, SVG_FILE};
pub use sweep::{
    load_baseline, load_dataset, load_sweep, predictions_digest, run_sweep, save_sweep, sweep_model, train_inline,
    SweepRecord, SweepResult,
};

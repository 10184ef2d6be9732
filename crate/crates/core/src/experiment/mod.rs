//! Config-driven batch experiments: validation, replicate-parallel execution
//! with checkpoints, summaries and plot-ready output files.

mod columnar;
mod config;
mod run;

pub use columnar::{read_columnar, write_columnar, Column, ColumnData};
pub use config::{
    exit_code, BrownianSection, ExperimentConfig, ExperimentKind, FbmSection, HammersleySection,
    HopfLaxSection, WalksSection,
};
pub use run::{
    run, stage_seed, walk_kernels, Check, FitReport, HopfLaxPoint, RunOptions, RunStatus,
    RunSummary, StageReport, CHECKPOINT_FILE, SCHEMA_VERSION,
};

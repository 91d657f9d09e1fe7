//! Coverage studies, data analysis and p-values on top of `repro_core`.

pub mod analyze;
pub mod config;
pub mod coverage;
pub mod data;
pub mod pvalue;

pub use analyze::{analyze, load, render_text, AnalysisReport, Observed, SetReport};
pub use config::{ExperimentConfig, GridArg, ModelId};
pub use coverage::{read_records, run_coverage, summarize, CoverageRun, ExperimentRecord, Summary};
pub use pvalue::{pvalue, PValueReport};

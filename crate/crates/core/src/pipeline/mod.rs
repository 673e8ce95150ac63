//! Ingestion, analysis orchestration and output.

pub mod analysis;
pub mod emit;
pub mod ingest;
pub mod plots;
mod svg;

pub use analysis::{run_analysis, AnalysisOptions, AnalysisReport, CohortReport, ComparisonReport, PlotData, COMBINED_LABEL};
pub use emit::{emit_gains, emit_report, format_g, round_sig, Format};
pub use ingest::{ingest, ingest_reader, percent_to_unit, Dataset, Scale};
pub use plots::{emit_plot_data, plot_files, PLOT_FILES};

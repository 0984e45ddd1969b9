//! Evaluation harness: replay sequences with forced merges, collect detector
//! scores, and turn them into ROC curves and reports.

mod live;
mod pipeline;
mod report;
mod roc;
mod run;
mod suite;

pub use live::{live_mode, write_events, LiveEvent, LiveOutcome};
pub use pipeline::{merges_for, replay, Pipeline, StepOutcome};
pub use report::{
    emit_reports, from_rows, read_results_csv, roc_svg, summarize, to_rows, write_results_csv, ResultRow, SummaryRow,
};
pub use roc::{best_operating_point, compute_roc, roc_from_scores, RocCurve, RocPoint};
pub use run::{run_sequence, DetectorSummary, SequenceResult};
pub use suite::{build_suite, run_suite, SuiteItem, SuiteSpec};

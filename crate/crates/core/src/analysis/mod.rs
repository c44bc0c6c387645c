//! Parallelism, stability and accuracy analysis of embedded pairs.

pub mod accuracy;
pub mod graph;
pub mod parallel;
pub mod poly;
pub mod schedule;
pub mod stability;

pub use graph::{GraphError, StageGraph};
pub use parallel::{parallel_metrics, ParallelReport};
pub use schedule::{build_schedule, Schedule, ScheduleError};
pub use stability::{stability_polynomial, stability_report, StabilityPolynomial, StabilityReport};
pub use accuracy::{accuracy_report, AccuracyError, AccuracyReport};

use crate::builders::EmbeddedMethod;

/// Everything `analyze` reports for one method.
#[derive(Clone, Debug)]
pub struct MethodReport {
    pub label: String,
    pub parallel: ParallelReport,
    pub stability: StabilityReport,
    /// Unavailable when order `p + 1` exceeds the tree enumeration.
    pub accuracy: Result<AccuracyReport, AccuracyError>,
}

pub fn analyze_method(m: &EmbeddedMethod) -> MethodReport {
    MethodReport {
        label: m.label().to_string(),
        parallel: parallel_metrics(m),
        stability: stability_report(m.tableau()),
        accuracy: accuracy_report(m),
    }
}

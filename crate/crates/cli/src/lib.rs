//! Library side of the `rkpairs` command: method selectors, analysis and
//! integration rows, and work-precision sweeps.

pub mod method;
pub mod output;
pub mod sweep;

use rkpairs_core::problems::{problem_by_name, Problem};

pub use method::MethodSpec;
pub use sweep::{run_sweep, BenchRow, SweepPlan};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Looks up a problem; `seed` fills in `nbody:N` without an explicit seed.
pub fn resolve_problem(name: &str, seed: Option<u64>) -> Result<Problem, CliError> {
    let name = match (name.strip_prefix("nbody:"), seed) {
        (Some(rest), Some(seed)) if !rest.contains(':') => format!("{name}:{seed}"),
        _ => name.to_string(),
    };
    problem_by_name(&name).map_err(|e| CliError::Usage(e.to_string()))
}

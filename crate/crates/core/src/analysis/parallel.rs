//! Speedup, process count and efficiency of stage-parallel execution.

use num_bigint::BigInt;
use num_integer::Integer;

use super::schedule::{chain_processes, list_schedule};
use crate::builders::EmbeddedMethod;
use crate::exact::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelReport {
    pub s: usize,
    pub s_seq: usize,
    /// `S = s / s_seq`.
    pub speedup: Rational,
    /// Processes used by the schedule that attains the critical-path
    /// makespan (`s_seq` unless a stage feeds only the embedded weights).
    pub processes: usize,
    /// `ceil(s / critical path)`, a lower bound on any such process count;
    /// equal to `ceil(S)` for the generated methods.
    pub processes_lower: usize,
    /// `E = S / P`.
    pub efficiency: Rational,
}

impl ParallelReport {
    /// Whether `processes` is known to be minimal.
    pub fn is_minimal(&self) -> bool {
        self.processes == self.processes_lower
    }
}

/// Extrapolation methods pack their chains first-fit decreasing; other
/// methods take the fewest workers for which critical-path list scheduling
/// reaches the critical-path length.
pub fn parallel_metrics(m: &EmbeddedMethod) -> ParallelReport {
    let g = m.graph();
    let s = m.stages();
    let s_seq = g.seq_stages().expect("stage graphs are acyclic");
    let target = g.critical_path().expect("stage graphs are acyclic");
    let lower = s.div_ceil(target);
    let processes = chain_processes(m).unwrap_or_else(|| {
        (lower..=s)
            .find(|&q| list_schedule(g, q).is_ok_and(|sch| sch.makespan() == target))
            .expect("s workers always reach the critical path")
    });
    let speedup = Rational::new(BigInt::from(s), BigInt::from(s_seq));
    let efficiency = &speedup / Rational::from_integer(BigInt::from(processes));
    ParallelReport {
        s,
        s_seq,
        speedup,
        processes,
        processes_lower: lower,
        efficiency,
    }
}

/// `ceil(a / b)` for the closed forms below.
fn ceil_div(a: u32, b: u32) -> u32 {
    Integer::div_ceil(&a, &b)
}

/// Process counts of the parallel-implementation table: `ceil(p/2)`,
/// `ceil((p+2)/4)` and `p - 1`.
pub fn table_processes(family: crate::builders::Family, p: u32, theta_zero: bool) -> u32 {
    use crate::builders::Family;
    match family {
        Family::ExEuler => ceil_div(p, 2),
        Family::ExMidpoint => ceil_div(p + 2, 4),
        Family::DcEuler if theta_zero => p - 1,
        _ => 1,
    }
}

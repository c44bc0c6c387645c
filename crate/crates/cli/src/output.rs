//! CSV schemas and number formatting.

use std::io::Write;

use rkpairs_core::analysis::MethodReport;
use rkpairs_core::integrate::RunRecord;
use rkpairs_core::Scalar;

pub const ANALYZE_HEADER: [&str; 12] = [
    "label", "s", "s_seq", "S", "P", "E", "I_real", "I_imag", "C_p1", "eta", "eta_parallel", "defect",
];

pub const INTEGRATE_HEADER: [&str; 16] = [
    "method",
    "problem",
    "tol",
    "h0",
    "fixed_step",
    "executor",
    "workers",
    "status",
    "steps_accepted",
    "steps_rejected",
    "f_evals",
    "f_evals_seq",
    "wall_time",
    "t_final",
    "final_error",
    "final_state",
];

pub const BENCH_HEADER: [&str; 14] = [
    "method",
    "problem",
    "tol",
    "error",
    "f_evals",
    "f_evals_seq",
    "steps_accepted",
    "steps_rejected",
    "wall_time",
    "workers",
    "speedup",
    "failed",
    "trend_violation",
    "failure",
];

/// 17 significant digits, so every `f64` reads back exactly.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn analyze_row(r: &MethodReport) -> Vec<String> {
    let p = &r.parallel;
    let acc = r.accuracy.as_ref().ok();
    vec![
        r.label.clone(),
        p.s.to_string(),
        p.s_seq.to_string(),
        num(p.speedup.to_f64()),
        p.processes.to_string(),
        num(p.efficiency.to_f64()),
        num(r.stability.real.value),
        num(r.stability.imag.value),
        opt_num(acc.map(|a| a.c_p1)),
        opt_num(acc.map(|a| a.eta)),
        opt_num(acc.map(|a| a.eta_parallel)),
        acc.map(|a| a.defect.to_string()).unwrap_or_default(),
    ]
}

/// Run settings that accompany a `RunRecord` in an `integrate` row.
pub struct RunContext<'a> {
    pub method: &'a str,
    pub problem: &'a str,
    pub tol: Option<f64>,
    pub h0: Option<f64>,
    pub fixed_step: Option<f64>,
    pub executor: &'a str,
    pub workers: usize,
}

/// `status` is `ok` or the failure message. The final state is
/// space-separated.
pub fn integrate_row(ctx: &RunContext, rec: &RunRecord, status: &str) -> Vec<String> {
    let state: Vec<String> = rec.final_state.iter().map(|&v| num(v)).collect();
    vec![
        ctx.method.into(),
        ctx.problem.into(),
        opt_num(ctx.tol),
        opt_num(ctx.h0),
        opt_num(ctx.fixed_step),
        ctx.executor.into(),
        ctx.workers.to_string(),
        status.into(),
        rec.steps_accepted.to_string(),
        rec.steps_rejected.to_string(),
        rec.f_evals.to_string(),
        rec.f_evals_seq.to_string(),
        num(rec.wall_time.as_secs_f64()),
        num(rec.t_final),
        opt_num(rec.final_error),
        state.join(" "),
    ]
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

//! Work-precision sweeps over a tolerance ladder.

use std::io::Write;
use std::path::Path;

use rkpairs_core::integrate::{
    integrate, ControllerConfig, ControllerMode, Executor, IntegrateOptions, RunRecord,
};
use sha2::{Digest, Sha256};

use crate::method::MethodSpec;
use crate::output::{csv_writer, num, opt_num, BENCH_HEADER};
use crate::{resolve_problem, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecutorKind {
    Serial,
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub methods: Vec<MethodSpec>,
    pub problem: String,
    /// Strictly decreasing.
    pub tolerances: Vec<f64>,
    pub executor: ExecutorKind,
    /// One set of rows per worker count; ignored by the serial executor.
    pub workers: Vec<usize>,
    pub repetitions: usize,
    pub h0: f64,
    pub pi: bool,
    pub seed: Option<u64>,
}

impl SweepPlan {
    /// `1e-3, 1e-4, ..., 1e-11`.
    pub fn default_ladder() -> Vec<f64> {
        (3..=11).map(|k| format!("1e-{k}").parse().unwrap()).collect()
    }

    pub fn new(methods: Vec<MethodSpec>, problem: &str) -> Self {
        Self {
            methods,
            problem: problem.into(),
            tolerances: Self::default_ladder(),
            executor: ExecutorKind::Serial,
            workers: vec![1],
            repetitions: 3,
            h0: 1e-3,
            pi: false,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.into()));
        if self.methods.is_empty() {
            return usage("bench needs at least one method");
        }
        if self.tolerances.is_empty() || self.tolerances.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return usage("tolerances must be positive and finite");
        }
        if self.tolerances.windows(2).any(|w| w[1] >= w[0]) {
            return usage("tolerance ladder must be strictly decreasing");
        }
        if self.repetitions == 0 {
            return usage("repetitions must be at least 1");
        }
        if self.workers.is_empty() || self.workers.contains(&0) {
            return usage("worker counts must be at least 1");
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return usage("h0 must be positive");
        }
        Ok(())
    }

    fn executors(&self) -> Vec<(usize, Executor)> {
        match self.executor {
            ExecutorKind::Serial => vec![(1, Executor::Serial)],
            ExecutorKind::Parallel => self
                .workers
                .iter()
                .map(|&w| (w, Executor::Parallel { workers: w }))
                .collect(),
        }
    }

    /// Everything that affects the deterministic columns, plus the
    /// repetition count.
    pub fn canonical(&self) -> String {
        let methods: Vec<String> = self.methods.iter().map(|m| m.to_string()).collect();
        let tols: Vec<String> = self.tolerances.iter().map(|&t| num(t)).collect();
        let workers: Vec<String> = self.workers.iter().map(|w| w.to_string()).collect();
        format!(
            "methods={};problem={};tol={};executor={:?};workers={};reps={};h0={};pi={};seed={}",
            methods.join(","),
            self.problem,
            tols.join(","),
            self.executor,
            workers.join(","),
            self.repetitions,
            num(self.h0),
            self.pi,
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        )
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub problem: String,
    pub tol: f64,
    /// Max-norm error at the final time; `None` for failed cells.
    pub error: Option<f64>,
    pub f_evals: u64,
    pub f_evals_seq: u64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    /// Median over the repetitions, in seconds.
    pub wall_time: f64,
    pub workers: usize,
    /// `wall_time(1 worker) / wall_time`, when the 1-worker cell exists.
    pub speedup: Option<f64>,
    /// Failure message of a failed cell.
    pub failure: Option<String>,
    /// Error grew or work shrank against the previous, looser tolerance.
    pub trend_violation: bool,
}

impl BenchRow {
    fn new(method: &str, problem: &str, tol: f64, workers: usize, rec: &RunRecord, wall: f64) -> Self {
        Self {
            method: method.into(),
            problem: problem.into(),
            tol,
            error: rec.final_error,
            f_evals: rec.f_evals,
            f_evals_seq: rec.f_evals_seq,
            steps_accepted: rec.steps_accepted,
            steps_rejected: rec.steps_rejected,
            wall_time: wall,
            workers,
            speedup: None,
            failure: None,
            trend_violation: false,
        }
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn record(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.problem.clone(),
            num(self.tol),
            opt_num(self.error),
            self.f_evals.to_string(),
            self.f_evals_seq.to_string(),
            self.steps_accepted.to_string(),
            self.steps_rejected.to_string(),
            num(self.wall_time),
            self.workers.to_string(),
            opt_num(self.speedup),
            u8::from(self.failed()).to_string(),
            u8::from(self.trend_violation).to_string(),
            self.failure.clone().unwrap_or_default(),
        ]
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs every (method, workers, tolerance) cell. Failed cells become rows
/// with a failure message; only setup problems abort the sweep.
pub fn run_sweep(
    plan: &SweepPlan,
    tableau_dir: Option<&Path>,
    cache_dir: Option<&Path>,
) -> Result<Vec<BenchRow>, CliError> {
    plan.validate()?;
    let problem = resolve_problem(&plan.problem, plan.seed)?;
    let ivp = problem
        .with_reference(cache_dir)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let methods = plan
        .methods
        .iter()
        .map(|m| m.build(tableau_dir))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for m in &methods {
        for (workers, executor) in plan.executors() {
            for &tol in &plan.tolerances {
                let mut cfg = ControllerConfig::new(tol, plan.h0);
                if plan.pi {
                    cfg = cfg.with_mode(ControllerMode::Pi { beta1: None, beta2: None });
                }
                let opts = IntegrateOptions::adaptive(cfg)
                    .with_executor(executor)
                    .without_trajectory();
                let mut walls = Vec::with_capacity(plan.repetitions);
                let mut first = None;
                for _ in 0..plan.repetitions {
                    let out = integrate(m, &ivp, &opts);
                    let rec = match &out {
                        Ok((_, rec)) => rec,
                        Err(fail) => &fail.record,
                    };
                    walls.push(rec.wall_time.as_secs_f64());
                    first.get_or_insert(out);
                }
                let wall = median(walls);
                let row = match first.expect("repetitions >= 1") {
                    Ok((_, rec)) => BenchRow::new(m.label(), &problem.name, tol, workers, &rec, wall),
                    Err(fail) => {
                        let mut row = BenchRow::new(m.label(), &problem.name, tol, workers, &fail.record, wall);
                        row.error = None;
                        row.failure = Some(fail.kind.to_string());
                        row
                    }
                };
                rows.push(row);
            }
        }
    }
    fill_speedup(&mut rows);
    flag_trends(&mut rows);
    Ok(rows)
}

fn fill_speedup(rows: &mut [BenchRow]) {
    let base: Vec<Option<f64>> = rows
        .iter()
        .map(|r| {
            rows.iter()
                .find(|o| o.workers == 1 && o.method == r.method && o.tol == r.tol && !o.failed())
                .map(|o| o.wall_time)
        })
        .collect();
    for (r, b) in rows.iter_mut().zip(base) {
        if let (Some(b), false) = (b, r.failed()) {
            r.speedup = Some(b / r.wall_time);
        }
    }
}

/// Tighter tolerance should give no larger error and no less work.
pub fn flag_trends(rows: &mut [BenchRow]) {
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if prev.method != cur.method || prev.workers != cur.workers || prev.failed() || cur.failed() {
            continue;
        }
        let worse = match (prev.error, cur.error) {
            (Some(a), Some(b)) => b > a,
            _ => false,
        };
        rows[i].trend_violation = worse || cur.f_evals < prev.f_evals;
    }
}

/// Provenance comment lines, then the header and one record per row.
pub fn write_bench_csv<W: Write>(mut w: W, plan: &SweepPlan, rows: &[BenchRow]) -> Result<(), CliError> {
    writeln!(w, "# rkpairs bench")?;
    writeln!(w, "# seed={}", plan.seed.map(|s| s.to_string()).unwrap_or_else(|| "default".into()))?;
    writeln!(w, "# config={}", plan.config_hash())?;
    writeln!(w, "# plan={}", plan.canonical())?;
    let mut out = csv_writer(w);
    out.write_record(BENCH_HEADER)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

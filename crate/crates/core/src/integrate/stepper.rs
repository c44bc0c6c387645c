//! One step of an embedded pair, evaluated serially or level by level on a
//! thread pool.

use rayon::prelude::*;

use super::{EvalError, Rhs};
use crate::analysis::{build_schedule, Schedule, ScheduleError};
use crate::builders::EmbeddedMethod;
use crate::exact::{Scalar, Tableau};

/// Nonzero coefficients of a tableau in `f64`.
#[derive(Clone, Debug)]
pub struct StepTableau {
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<(usize, f64)>,
    b_hat: Vec<(usize, f64)>,
}

fn nonzeros(v: &[crate::exact::Coefficient]) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j, c.to_f64()))
        .collect()
}

impl StepTableau {
    pub fn new(t: &Tableau) -> Self {
        Self {
            rows: (0..t.stages()).map(|i| nonzeros(t.a_row(i))).collect(),
            b: nonzeros(t.b()),
            b_hat: nonzeros(t.b_hat()),
        }
    }

    pub fn stages(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("non-finite value in the step result")]
    NonFinite,
    #[error("stage {stage}: {source}")]
    Evaluation { stage: usize, source: EvalError },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Executor {
    #[default]
    Serial,
    /// Stages of one schedule slot run concurrently on `workers` threads.
    Parallel { workers: usize },
}

#[derive(Debug, thiserror::Error)]
pub enum ExecutorError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("thread pool: {0}")]
    Pool(String),
}

enum Plan {
    Serial,
    Parallel {
        pool: rayon::ThreadPool,
        levels: Vec<Vec<usize>>,
    },
}

/// Writes `out = y + h * sum_j a_j k_j` with the sum taken in stage order.
fn combine(out: &mut [f64], y: &[f64], h: f64, terms: &[(usize, f64)], k: &[Vec<f64>]) {
    out.fill(0.0);
    for &(j, a) in terms {
        for (o, kj) in out.iter_mut().zip(&k[j]) {
            *o += a * kj;
        }
    }
    for (o, yi) in out.iter_mut().zip(y) {
        *o = yi + h * *o;
    }
}

/// Reusable buffers and execution plan for one method and problem size.
pub struct Stepper {
    tab: StepTableau,
    plan: Plan,
    k: Vec<Vec<f64>>,
    states: Vec<Vec<f64>>,
    schedule: Option<Schedule>,
}

impl Stepper {
    pub fn serial(tab: StepTableau, dim: usize) -> Self {
        let s = tab.stages();
        Self {
            tab,
            plan: Plan::Serial,
            k: vec![vec![0.0; dim]; s],
            states: vec![vec![0.0; dim]; s],
            schedule: None,
        }
    }

    pub fn new(m: &EmbeddedMethod, dim: usize, executor: Executor) -> Result<Self, ExecutorError> {
        let mut st = Self::serial(StepTableau::new(m.tableau()), dim);
        if let Executor::Parallel { workers } = executor {
            let schedule = build_schedule(m, workers)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| ExecutorError::Pool(e.to_string()))?;
            st.plan = Plan::Parallel {
                pool,
                levels: schedule.levels(),
            };
            st.schedule = Some(schedule);
        }
        Ok(st)
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    pub fn stages(&self) -> usize {
        self.tab.stages()
    }

    fn eval_stage(
        rows: &[Vec<(usize, f64)>],
        i: usize,
        f: &dyn Rhs,
        y: &[f64],
        h: f64,
        k: &[Vec<f64>],
        state: &mut [f64],
        out: &mut [f64],
    ) -> Result<(), StepError> {
        combine(state, y, h, &rows[i], k);
        f.eval(state, out)
            .map_err(|source| StepError::Evaluation { stage: i, source })
    }

    /// Evaluates every stage, then writes both solutions.
    pub fn step(
        &mut self,
        f: &dyn Rhs,
        y: &[f64],
        h: f64,
        y_next: &mut [f64],
        y_hat: &mut [f64],
    ) -> Result<(), StepError> {
        let rows = &self.tab.rows;
        match &self.plan {
            Plan::Serial => {
                for i in 0..rows.len() {
                    let (done, rest) = self.k.split_at_mut(i);
                    // Stage i reads only earlier stages.
                    Self::eval_stage(rows, i, f, y, h, done, &mut self.states[i], &mut rest[0])?;
                }
            }
            Plan::Parallel { pool, levels } => {
                for level in levels {
                    let mut taken: Vec<(usize, Vec<f64>, Vec<f64>)> = level
                        .iter()
                        .map(|&i| {
                            (
                                i,
                                std::mem::take(&mut self.states[i]),
                                std::mem::take(&mut self.k[i]),
                            )
                        })
                        .collect();
                    let k = &self.k;
                    let results: Vec<Result<(), StepError>> = pool.install(|| {
                        taken
                            .par_iter_mut()
                            .map(|(i, state, out)| Self::eval_stage(rows, *i, f, y, h, k, state, out))
                            .collect()
                    });
                    for (i, state, out) in taken {
                        self.states[i] = state;
                        self.k[i] = out;
                    }
                    // Lowest stage index first, as in serial order.
                    results.into_iter().collect::<Result<(), StepError>>()?;
                }
            }
        }
        combine(y_next, y, h, &self.tab.b, &self.k);
        combine(y_hat, y, h, &self.tab.b_hat, &self.k);
        if y_next.iter().chain(y_hat.iter()).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(StepError::NonFinite)
        }
    }
}

/// One step of `t` from `y` with step `h`: `(y_next, y_hat_next)`.
pub fn rk_step(t: &Tableau, f: &dyn Rhs, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>), StepError> {
    let mut st = Stepper::serial(StepTableau::new(t), y.len());
    let mut y_next = vec![0.0; y.len()];
    let mut y_hat = vec![0.0; y.len()];
    st.step(f, y, h, &mut y_next, &mut y_hat)?;
    Ok((y_next, y_hat))
}

//! Fixed-step and adaptive integration with an embedded pair.

mod controller;
mod stepper;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

pub use controller::{control_step, ConfigError, Controller, ControllerConfig, ControllerMode};
pub use stepper::{rk_step, Executor, ExecutorError, StepError, StepTableau, Stepper};

use crate::builders::EmbeddedMethod;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct EvalError(pub String);

/// Autonomous right-hand side `y' = f(y)`. Implementations must tolerate
/// concurrent calls on distinct inputs.
pub trait Rhs: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError>;
}

/// Wraps a right-hand side and counts its evaluations.
pub struct CountingRhs<R> {
    inner: R,
    count: AtomicU64,
}

impl<R: Rhs> CountingRhs<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl<R: Rhs> Rhs for CountingRhs<R> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(y, dy)
    }
}

impl<R: Rhs + ?Sized> Rhs for Arc<R> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        (**self).eval(y, dy)
    }
}

impl<R: Rhs + ?Sized> Rhs for &R {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        (**self).eval(y, dy)
    }
}

/// Initial value problem on `[t0, t_end]`.
#[derive(Clone)]
pub struct Ivp {
    pub rhs: Arc<dyn Rhs>,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    /// State at `t_end`, when known; fills `RunRecord::final_error`.
    pub reference: Option<Vec<f64>>,
}

impl std::fmt::Debug for Ivp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ivp")
            .field("dim", &self.rhs.dim())
            .field("y0", &self.y0)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepMode {
    Adaptive(ControllerConfig),
    /// Constant step; the last step is shortened to end at `t_end`.
    Fixed { h: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub mode: StepMode,
    pub executor: Executor,
    /// Keep every accepted state.
    pub record_trajectory: bool,
    /// Bound on step attempts.
    pub max_attempts: u64,
}

impl IntegrateOptions {
    pub fn adaptive(cfg: ControllerConfig) -> Self {
        Self {
            mode: StepMode::Adaptive(cfg),
            executor: Executor::Serial,
            record_trajectory: true,
            max_attempts: 10_000_000,
        }
    }

    pub fn fixed(h: f64) -> Self {
        Self {
            mode: StepMode::Fixed { h },
            ..Self::adaptive(ControllerConfig::new(1.0, 1.0))
        }
    }

    pub fn with_executor(mut self, executor: Executor) -> Self {
        self.executor = executor;
        self
    }

    pub fn without_trajectory(mut self) -> Self {
        self.record_trajectory = false;
        self
    }
}

/// Accepted states, including the initial one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub f_evals: u64,
    /// `(accepted + rejected) * s_seq`.
    pub f_evals_seq: u64,
    pub wall_time: Duration,
    pub t_final: f64,
    pub final_state: Vec<f64>,
    pub final_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FailureKind {
    #[error("step size driven to zero at t = {t} (h = {h}); the error estimate may be defective")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("non-finite solution at t = {t} with fixed step h = {h}")]
    NonFinite { t: f64, h: f64 },
    #[error("right-hand side failed at t = {t}: {source}")]
    Evaluation { t: f64, source: StepError },
    #[error("gave up after {0} step attempts")]
    TooManySteps(u64),
    #[error("invalid setup: {0}")]
    Setup(String),
}

/// A failed run, with the statistics accumulated up to the failure.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{kind}")]
pub struct IntegrationFailure {
    pub kind: FailureKind,
    pub record: RunRecord,
}

fn max_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct Run<'a> {
    ivp: &'a Ivp,
    s: u64,
    s_seq: u64,
    accepted: u64,
    rejected: u64,
    started: Instant,
    t: f64,
    y: Vec<f64>,
}

impl Run<'_> {
    fn record(&self) -> RunRecord {
        let attempts = self.accepted + self.rejected;
        RunRecord {
            steps_accepted: self.accepted,
            steps_rejected: self.rejected,
            f_evals: attempts * self.s,
            f_evals_seq: attempts * self.s_seq,
            wall_time: self.started.elapsed(),
            t_final: self.t,
            final_state: self.y.clone(),
            final_error: self
                .ivp
                .reference
                .as_ref()
                .filter(|_| self.t == self.ivp.t_end)
                .map(|r| max_norm_diff(&self.y, r)),
        }
    }

    fn fail(&self, kind: FailureKind) -> IntegrationFailure {
        IntegrationFailure {
            kind,
            record: self.record(),
        }
    }
}

/// Integrates `ivp` from `t0` to `t_end`. Serial and parallel executors give
/// bitwise identical results.
pub fn integrate(
    m: &EmbeddedMethod,
    ivp: &Ivp,
    opts: &IntegrateOptions,
) -> Result<(Trajectory, RunRecord), IntegrationFailure> {
    let dim = ivp.y0.len();
    let s_seq = m.graph().seq_stages().expect("acyclic") as u64;
    let mut run = Run {
        ivp,
        s: m.stages() as u64,
        s_seq,
        accepted: 0,
        rejected: 0,
        started: Instant::now(),
        t: ivp.t0,
        y: ivp.y0.clone(),
    };
    if dim != ivp.rhs.dim() || !(ivp.t_end > ivp.t0) {
        return Err(run.fail(FailureKind::Setup(format!(
            "need dim(y0) = dim(f) and t_end > t0 (dim {dim} vs {}, t0 {}, t_end {})",
            ivp.rhs.dim(),
            ivp.t0,
            ivp.t_end
        ))));
    }
    let mut stepper =
        Stepper::new(m, dim, opts.executor).map_err(|e| run.fail(FailureKind::Setup(e.to_string())))?;
    let mut traj = Trajectory::default();
    if opts.record_trajectory {
        traj.t.push(run.t);
        traj.y.push(run.y.clone());
    }
    let mut y_next = vec![0.0; dim];
    let mut y_hat = vec![0.0; dim];
    let mut controller = match &opts.mode {
        StepMode::Adaptive(cfg) => {
            cfg.validate()
                .map_err(|e| run.fail(FailureKind::Setup(e.to_string())))?;
            Some(Controller::new(cfg.clone(), m.embedded_order()))
        }
        StepMode::Fixed { h } if *h > 0.0 && h.is_finite() => None,
        StepMode::Fixed { h } => {
            return Err(run.fail(FailureKind::Setup(format!("fixed step {h} must be positive"))))
        }
    };
    let mut h = match &opts.mode {
        StepMode::Adaptive(cfg) => cfg.h0,
        StepMode::Fixed { h } => *h,
    };
    let t_end = ivp.t_end;
    while run.t < t_end {
        if run.accepted + run.rejected >= opts.max_attempts {
            return Err(run.fail(FailureKind::TooManySteps(opts.max_attempts)));
        }
        if !(h > 0.0) || !h.is_finite() || h < 1e2 * f64::EPSILON * run.t.abs() {
            return Err(run.fail(FailureKind::StepSizeUnderflow { t: run.t, h }));
        }
        // A step that would leave less than a sliver is stretched to the end.
        let last = run.t + h * (1.0 + 1e-10) >= t_end;
        let h_step = if last { t_end - run.t } else { h };
        let outcome = stepper.step(ivp.rhs.as_ref(), &run.y, h_step, &mut y_next, &mut y_hat);
        let (accepted, h_next) = match (outcome, controller.as_mut()) {
            (Ok(()), Some(c)) => c.propose(h_step, max_norm_diff(&y_next, &y_hat), !last),
            (Ok(()), None) => (true, h),
            (Err(StepError::NonFinite), Some(c)) => (false, c.config().kappa_min * h_step),
            (Err(StepError::NonFinite), None) => {
                run.rejected += 1;
                return Err(run.fail(FailureKind::NonFinite { t: run.t, h: h_step }));
            }
            (Err(e), _) => {
                run.rejected += 1;
                return Err(run.fail(FailureKind::Evaluation { t: run.t, source: e }));
            }
        };
        if accepted {
            run.accepted += 1;
            run.t = if last { t_end } else { run.t + h_step };
            std::mem::swap(&mut run.y, &mut y_next);
            if opts.record_trajectory {
                traj.t.push(run.t);
                traj.y.push(run.y.clone());
            }
        } else {
            run.rejected += 1;
        }
        h = h_next;
    }
    Ok((traj, run.record()))
}

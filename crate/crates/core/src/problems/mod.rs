//! Test problems and their reference solutions.

mod nbody;
mod reference;

use std::sync::Arc;

pub use nbody::{NBody, NBodyConfig};
pub use reference::{reference_solution, ReferenceError, REFERENCE_TOLERANCE};

use crate::integrate::{EvalError, Ivp, Rhs};

/// How the end state used for error measurement is obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferencePolicy {
    Analytic(Vec<f64>),
    /// BS5(4) at tolerance `1e-13`, cached.
    Numerical,
}

#[derive(Clone, Debug)]
pub struct Problem {
    /// Stable identity, also the cache key (`sb1`, `nbody:100:7`, ...).
    pub name: String,
    pub ivp: Ivp,
    pub policy: ReferencePolicy,
}

impl Problem {
    /// The IVP with its reference end state attached.
    pub fn with_reference(&self, cache_dir: Option<&std::path::Path>) -> Result<Ivp, ReferenceError> {
        let mut ivp = self.ivp.clone();
        ivp.reference = Some(reference_solution(self, cache_dir)?);
        Ok(ivp)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}`; expected sb1, b1, exp, cubic or nbody:N[:seed]")]
    Unknown(String),
    #[error("bad n-body spec `{0}`: {1}")]
    NBody(String, String),
}

/// Restricted three-body problem SB1 (a periodic orbit).
pub const SB1_MU: f64 = 0.0121285627653123;
pub const SB1_PERIOD: f64 = 6.192169331319639;
pub const SB1_Y0: [f64; 4] = [1.2, 0.0, 0.0, -1.049357509830319];

#[derive(Clone, Copy, Debug)]
pub struct ThreeBody {
    pub mu: f64,
}

impl Rhs for ThreeBody {
    fn dim(&self) -> usize {
        4
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        let mu = self.mu;
        let mu1 = 1.0 - mu;
        let d1 = ((y[0] + mu).powi(2) + y[1] * y[1]).powf(1.5);
        let d2 = ((y[0] - mu1).powi(2) + y[1] * y[1]).powf(1.5);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = y[0] + 2.0 * y[3] - mu1 * (y[0] + mu) / d1 - mu * (y[0] - mu1) / d2;
        dy[3] = y[1] - 2.0 * y[2] - mu1 * y[1] / d1 - mu * y[1] / d2;
        Ok(())
    }
}

pub fn sb1() -> Problem {
    Problem {
        name: "sb1".into(),
        ivp: Ivp {
            rhs: Arc::new(ThreeBody { mu: SB1_MU }),
            y0: SB1_Y0.to_vec(),
            t0: 0.0,
            t_end: SB1_PERIOD,
            reference: None,
        },
        policy: ReferencePolicy::Numerical,
    }
}

/// Two competing populations.
#[derive(Clone, Copy, Debug)]
pub struct Populations;

impl Rhs for Populations {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        let y12 = y[0] * y[1];
        dy[0] = 2.0 * (y[0] - y12);
        dy[1] = -(y[1] - y12);
        Ok(())
    }
}

pub const B1_T_END: f64 = 20.0;

pub fn b1() -> Problem {
    Problem {
        name: "b1".into(),
        ivp: Ivp {
            rhs: Arc::new(Populations),
            y0: vec![1.0, 3.0],
            t0: 0.0,
            t_end: B1_T_END,
            reference: None,
        },
        policy: ReferencePolicy::Numerical,
    }
}

/// `y' = y`.
#[derive(Clone, Copy, Debug)]
pub struct Exponential;

impl Rhs for Exponential {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        dy[0] = y[0];
        Ok(())
    }
}

pub fn exponential() -> Problem {
    Problem {
        name: "exp".into(),
        ivp: Ivp {
            rhs: Arc::new(Exponential),
            y0: vec![1.0],
            t0: 0.0,
            t_end: 1.0,
            reference: None,
        },
        policy: ReferencePolicy::Analytic(vec![std::f64::consts::E]),
    }
}

/// `y' = -y^3 + w cos(w tau) + sin(w tau)^3`, `tau' = 1`, with exact
/// solution `y = sin(w tau)` from `(0, 0)`.
#[derive(Clone, Copy, Debug)]
pub struct ForcedCubic {
    pub omega: f64,
}

impl Rhs for ForcedCubic {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        let w = self.omega;
        let s = (w * y[1]).sin();
        dy[0] = -y[0].powi(3) + w * (w * y[1]).cos() + s * s * s;
        dy[1] = 1.0;
        Ok(())
    }
}

pub const CUBIC_T_END: f64 = 2.0;

/// The forced cubic on `[0, 2]` with frequency `omega`.
pub fn forced_cubic_with(omega: f64) -> Problem {
    Problem {
        name: if omega == 1.0 { "cubic".into() } else { format!("cubic:{omega}") },
        ivp: Ivp {
            rhs: Arc::new(ForcedCubic { omega }),
            y0: vec![0.0, 0.0],
            t0: 0.0,
            t_end: CUBIC_T_END,
            reference: None,
        },
        policy: ReferencePolicy::Analytic(vec![(omega * CUBIC_T_END).sin(), CUBIC_T_END]),
    }
}

pub fn forced_cubic() -> Problem {
    forced_cubic_with(1.0)
}

pub fn nbody(cfg: NBodyConfig) -> Problem {
    let body = NBody::new(&cfg);
    Problem {
        name: cfg.name(),
        ivp: Ivp {
            y0: body.initial_state(),
            rhs: Arc::new(body),
            t0: 0.0,
            t_end: cfg.t_end,
            reference: None,
        },
        policy: ReferencePolicy::Numerical,
    }
}

/// `sb1`, `b1`, `exp`, `cubic` or `nbody:N[:seed]`.
pub fn problem_by_name(name: &str) -> Result<Problem, ProblemError> {
    match name {
        "sb1" => Ok(sb1()),
        "b1" => Ok(b1()),
        "exp" => Ok(exponential()),
        "cubic" => Ok(forced_cubic()),
        _ => {
            let Some(rest) = name.strip_prefix("nbody:") else {
                return Err(ProblemError::Unknown(name.into()));
            };
            let bad = |msg: &str| ProblemError::NBody(name.into(), msg.into());
            let mut parts = rest.split(':');
            let n: usize = parts
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| bad("body count must be an integer"))?;
            let seed: u64 = match parts.next() {
                Some(x) => x.parse().map_err(|_| bad("seed must be an integer"))?,
                None => NBodyConfig::DEFAULT_SEED,
            };
            if parts.next().is_some() {
                return Err(bad("expected nbody:N or nbody:N:seed"));
            }
            if n < 2 {
                return Err(bad("need at least two bodies"));
            }
            Ok(nbody(NBodyConfig::new(n, seed)))
        }
    }
}

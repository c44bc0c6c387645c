//! Symbolic execution of a one-step method: every state is tracked as
//! `y_n + h * sum_j k_j K_j`, where `K_j = f(Y_j)` are the stages recorded so
//! far.

use crate::exact::{Coefficient, Scalar, Tableau, TableauError};

use super::StageInfo;

#[derive(Clone, Debug)]
pub(crate) struct State<T> {
    /// Coefficient of `y_n`; 1 for every state the algorithms produce, but
    /// tracked so extrapolation combinations can be checked.
    pub y: T,
    /// Coefficients of `h K_j`; missing trailing entries are zero.
    pub k: Vec<T>,
}

impl<T: Scalar> State<T> {
    pub fn y_n() -> Self {
        Self {
            y: T::one(),
            k: Vec::new(),
        }
    }

    fn coeff(&self, j: usize) -> T {
        self.k.get(j).cloned().unwrap_or_else(T::zero)
    }

    /// `self + c h K_stage`.
    pub fn plus_stage(&self, c: &T, stage: usize) -> Self {
        let mut out = self.clone();
        if out.k.len() <= stage {
            out.k.resize(stage + 1, T::zero());
        }
        out.k[stage] = out.k[stage].add(c);
        out
    }

    /// `alpha self + beta other`.
    pub fn combine(&self, alpha: &T, other: &Self, beta: &T) -> Self {
        let n = self.k.len().max(other.k.len());
        let k = (0..n)
            .map(|j| alpha.mul(&self.coeff(j)).add(&beta.mul(&other.coeff(j))))
            .collect();
        Self {
            y: alpha.mul(&self.y).add(&beta.mul(&other.y)),
            k,
        }
    }

    pub fn is_y_n(&self) -> bool {
        self.k.iter().all(Scalar::is_zero)
    }

    fn weights(&self, s: usize) -> Vec<Coefficient> {
        (0..s).map(|j| self.coeff(j).into_coefficient()).collect()
    }
}

/// Records stage evaluations in the order the algorithm performs them.
pub(crate) struct Recorder<T> {
    rows: Vec<State<T>>,
    info: Vec<StageInfo>,
}

impl<T: Scalar> Recorder<T> {
    /// Starts with stage 0, `f(y_n)`, which every chain shares.
    pub fn new() -> Self {
        Self {
            rows: vec![State::y_n()],
            info: vec![StageInfo {
                label: "y_n".to_string(),
                chain: None,
                step: 0,
            }],
        }
    }

    /// Stage index holding `f(state)`, recording a new stage unless the state
    /// is `y_n` itself.
    pub fn eval(&mut self, state: &State<T>, info: StageInfo) -> usize {
        assert!(
            state.y.sub(&T::one()).is_zero(),
            "stage argument must have unit y_n coefficient"
        );
        if state.is_y_n() {
            return 0;
        }
        self.rows.push(state.clone());
        self.info.push(info);
        self.rows.len() - 1
    }

    pub fn finish(
        self,
        label: String,
        b: &State<T>,
        b_hat: &State<T>,
        p: u32,
        p_hat: u32,
    ) -> Result<(Tableau, Vec<StageInfo>), TableauError> {
        for w in [b, b_hat] {
            assert!(w.y.sub(&T::one()).is_zero(), "output must be consistent");
        }
        let s = self.rows.len();
        let a = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                debug_assert!(r.k.len() <= i);
                r.weights(i)
            })
            .collect();
        let t = Tableau::new(label, a, b.weights(s), b_hat.weights(s), p, p_hat)?;
        Ok((t, self.info))
    }
}

//! Explicit-Euler spectral deferred correction.

use crate::exact::rational::format_rational;
use crate::exact::{
    integer, rational, Coefficient, DoubleDouble, Rational, Scalar, Tableau, TableauError,
};

use super::symbolic::{Recorder, State};
use super::StageInfo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeFamily {
    Equispaced,
    /// Chebyshev-Lobatto points on `[0, 1]`: `c_j = (1 - cos(pi j/(p-1)))/2`.
    ChebyshevLobatto,
}

impl NodeFamily {
    pub fn name(self) -> &'static str {
        match self {
            NodeFamily::Equispaced => "equispaced",
            NodeFamily::ChebyshevLobatto => "chebyshev",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcConfig {
    pub p: u32,
    pub theta: Rational,
    pub nodes: NodeFamily,
    /// Skip the final sweep's unused evaluations when `theta = 0`. Turning
    /// this off keeps them as zero-weight stages.
    pub prune: bool,
}

impl DcConfig {
    pub fn new(p: u32, theta: Rational, nodes: NodeFamily) -> Self {
        Self {
            p,
            theta,
            nodes,
            prune: true,
        }
    }

    pub fn without_pruning(mut self) -> Self {
        self.prune = false;
        self
    }

    pub fn label(&self) -> String {
        let mut label = format!("dc-{}-theta-{}", self.p, format_rational(&self.theta));
        if self.nodes == NodeFamily::Equispaced {
            label.push_str("-equi");
        }
        if !self.prune {
            label.push_str("-unpruned");
        }
        label
    }

    /// The `p` quadrature nodes on `[0, 1]`.
    pub fn node_coefficients(&self) -> Vec<Coefficient> {
        match self.nodes {
            NodeFamily::Equispaced => equispaced(self.p as usize)
                .into_iter()
                .map(Coefficient::Exact)
                .collect(),
            NodeFamily::ChebyshevLobatto => chebyshev_lobatto(self.p as usize)
                .into_iter()
                .map(Coefficient::Approx)
                .collect(),
        }
    }

    /// `M[m][j]`: integral of the `m`-th Lagrange basis polynomial over
    /// `[c_j, c_{j+1}]`.
    pub fn integration_matrix(&self) -> Vec<Vec<Coefficient>> {
        fn to<T: Scalar>(m: Vec<Vec<T>>) -> Vec<Vec<Coefficient>> {
            m.into_iter()
                .map(|row| row.into_iter().map(Scalar::into_coefficient).collect())
                .collect()
        }
        match self.nodes {
            NodeFamily::Equispaced => to(integration_matrix(&equispaced(self.p as usize))),
            NodeFamily::ChebyshevLobatto => {
                to(integration_matrix(&chebyshev_lobatto(self.p as usize)))
            }
        }
    }
}

fn equispaced(p: usize) -> Vec<Rational> {
    (0..p).map(|j| rational(j as i64, p as i64 - 1)).collect()
}

/// `sin^2(pi j / (2(p-1)))`, mirrored so that `c_{p-1-j} = 1 - c_j` holds
/// exactly and the endpoints are exactly 0 and 1.
fn chebyshev_lobatto(p: usize) -> Vec<DoubleDouble> {
    let n = p - 1;
    let mut c = vec![DoubleDouble::ZERO; p];
    for j in 0..=n / 2 {
        let x = DoubleDouble::PI * DoubleDouble::from_f64(j as f64)
            / DoubleDouble::from_f64(2.0 * n as f64);
        c[j] = x.sin().square();
        c[n - j] = DoubleDouble::ONE - c[j];
    }
    if n % 2 == 0 {
        c[n / 2] = DoubleDouble::from_f64(0.5);
    }
    c[0] = DoubleDouble::ZERO;
    c[n] = DoubleDouble::ONE;
    c
}

/// Exact (in `T`) quadrature of the Lagrange basis on nodes `c`:
/// `M[m][j] = int_{c_j}^{c_{j+1}} l_m`.
pub(crate) fn integration_matrix<T: Scalar>(c: &[T]) -> Vec<Vec<T>> {
    let p = c.len();
    (0..p)
        .map(|m| {
            // Monomial coefficients of l_m, lowest degree first.
            let mut poly = vec![T::one()];
            for (i, ci) in c.iter().enumerate() {
                if i == m {
                    continue;
                }
                let denom = c[m].sub(ci);
                let mut next = vec![T::zero(); poly.len() + 1];
                for (d, a) in poly.iter().enumerate() {
                    let a = a.div(&denom);
                    next[d + 1] = next[d + 1].add(&a);
                    next[d] = next[d].sub(&a.mul(ci));
                }
                poly = next;
            }
            let antiderivative = |x: &T| {
                poly.iter().enumerate().rev().fold(T::zero(), |acc, (d, a)| {
                    acc.add(&a.div(&T::from_i64(d as i64 + 1))).mul(x)
                })
            };
            let values: Vec<T> = c.iter().map(antiderivative).collect();
            (0..p - 1).map(|j| values[j + 1].sub(&values[j])).collect()
        })
        .collect()
}

fn stage(k: usize, j: usize) -> StageInfo {
    StageInfo {
        label: format!("Y_{{{k},{j}}}"),
        chain: Some(k),
        step: j,
    }
}

struct Sweeps<T> {
    states: Vec<Vec<State<T>>>,
    evals: Vec<Vec<Option<usize>>>,
}

impl<T: Scalar> Sweeps<T> {
    /// Stage index of `f(Y_{k,j})`, evaluating it on first use.
    fn f(&mut self, rec: &mut Recorder<T>, k: usize, j: usize) -> usize {
        if let Some(idx) = self.evals[k][j] {
            return idx;
        }
        let idx = rec.eval(&self.states[k][j], stage(k, j));
        self.evals[k][j] = Some(idx);
        idx
    }
}

fn build<T: Scalar>(
    cfg: &DcConfig,
    c: &[T],
) -> Result<(Tableau, Vec<StageInfo>), TableauError> {
    let p = cfg.p as usize;
    let m = integration_matrix(c);
    let theta = T::from_rational(&cfg.theta);
    let coupled = !Scalar::is_zero(&cfg.theta);
    let mut rec = Recorder::<T>::new();
    // Sweeps are 1-based; index 0 is unused.
    let mut sw = Sweeps {
        states: vec![Vec::new(); p + 1],
        evals: vec![vec![None; p]; p + 1],
    };
    sw.states[1].push(State::y_n());
    for j in 1..p {
        let dc = c[j].sub(&c[j - 1]);
        let kk = sw.f(&mut rec, 1, j - 1);
        let next = sw.states[1][j - 1].plus_stage(&dc, kk);
        sw.states[1].push(next);
    }
    for k in 2..=p {
        sw.states[k].push(State::y_n());
        for j in 1..p {
            let mut y = sw.states[k][j - 1].clone();
            if coupled {
                let w = theta.mul(&c[j].sub(&c[j - 1]));
                let new = sw.f(&mut rec, k, j - 1);
                let old = sw.f(&mut rec, k - 1, j - 1);
                y = y.plus_stage(&w, new).plus_stage(&w.neg(), old);
            }
            for (mm, row) in m.iter().enumerate() {
                let kk = sw.f(&mut rec, k - 1, mm);
                y = y.plus_stage(&row[j - 1], kk);
            }
            sw.states[k].push(y);
        }
    }
    if !cfg.prune {
        for j in 0..p - 1 {
            sw.f(&mut rec, p, j);
        }
    }
    let b = sw.states[p][p - 1].clone();
    let b_hat = sw.states[p - 1][p - 1].clone();
    rec.finish(cfg.label(), &b, &b_hat, cfg.p, cfg.p - 1)
}

pub(crate) fn dc_euler(cfg: &DcConfig) -> Result<(Tableau, Vec<StageInfo>), TableauError> {
    match cfg.nodes {
        NodeFamily::Equispaced => build(cfg, &equispaced(cfg.p as usize)),
        NodeFamily::ChebyshevLobatto => build(cfg, &chebyshev_lobatto(cfg.p as usize)),
    }
}

pub(crate) fn theta_in_range(theta: &Rational) -> bool {
    *theta >= integer(0) && *theta <= integer(1)
}

//! Gravitational N-body problem in three dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrate::{EvalError, Rhs};

#[derive(Clone, Debug, PartialEq)]
pub struct NBodyConfig {
    pub n: usize,
    pub seed: u64,
    pub softening: f64,
    pub t_end: f64,
}

impl NBodyConfig {
    pub const DEFAULT_SEED: u64 = 1;
    pub const DEFAULT_SOFTENING: f64 = 1e-3;
    /// A fraction of the free-fall time of the unit cube, before close
    /// encounters dominate the cost.
    pub const DEFAULT_T_END: f64 = 0.05;

    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            softening: Self::DEFAULT_SOFTENING,
            t_end: Self::DEFAULT_T_END,
        }
    }

    /// `nbody:N:seed`, with softening and final time appended when they
    /// differ from the defaults.
    pub fn name(&self) -> String {
        let mut s = format!("nbody:{}:{}", self.n, self.seed);
        if self.softening != Self::DEFAULT_SOFTENING || self.t_end != Self::DEFAULT_T_END {
            s.push_str(&format!(":eps={:e}:T={:e}", self.softening, self.t_end));
        }
        s
    }
}

/// Equal masses `1/N`, `G = 1`. State: positions `x_0, y_0, z_0, x_1, ...`,
/// then velocities in the same layout.
#[derive(Clone, Debug)]
pub struct NBody {
    masses: Vec<f64>,
    softening2: f64,
    positions: Vec<f64>,
    velocities: Vec<f64>,
}

impl NBody {
    /// Uniform positions in the unit cube from a ChaCha8 stream, zero
    /// velocities, centre of mass and momentum shifted to zero.
    pub fn new(cfg: &NBodyConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.n;
        let mut positions: Vec<f64> = (0..3 * n).map(|_| rng.gen::<f64>()).collect();
        let mut velocities = vec![0.0; 3 * n];
        for d in 0..3 {
            let mean_x = (0..n).map(|i| positions[3 * i + d]).sum::<f64>() / n as f64;
            let mean_v = (0..n).map(|i| velocities[3 * i + d]).sum::<f64>() / n as f64;
            for i in 0..n {
                positions[3 * i + d] -= mean_x;
                velocities[3 * i + d] -= mean_v;
            }
        }
        Self {
            masses: vec![1.0 / n as f64; n],
            softening2: cfg.softening * cfg.softening,
            positions,
            velocities,
        }
    }

    /// Explicit bodies, for tests and small examples.
    pub fn from_parts(masses: Vec<f64>, softening: f64, positions: Vec<f64>, velocities: Vec<f64>) -> Self {
        Self {
            masses,
            softening2: softening * softening,
            positions,
            velocities,
        }
    }

    pub fn bodies(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut y = self.positions.clone();
        y.extend_from_slice(&self.velocities);
        y
    }

    /// Kinetic plus (softened) potential energy.
    pub fn energy(&self, y: &[f64]) -> f64 {
        let n = self.bodies();
        let (x, v) = y.split_at(3 * n);
        let kinetic: f64 = (0..n)
            .map(|i| 0.5 * self.masses[i] * (0..3).map(|d| v[3 * i + d].powi(2)).sum::<f64>())
            .sum();
        let mut potential = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let r2: f64 = (0..3).map(|d| (x[3 * i + d] - x[3 * j + d]).powi(2)).sum();
                potential -= self.masses[i] * self.masses[j] / (r2 + self.softening2).sqrt();
            }
        }
        kinetic + potential
    }

    pub fn momentum(&self, y: &[f64]) -> [f64; 3] {
        let n = self.bodies();
        let v = &y[3 * n..];
        let mut p = [0.0; 3];
        for (i, m) in self.masses.iter().enumerate() {
            for d in 0..3 {
                p[d] += m * v[3 * i + d];
            }
        }
        p
    }
}

impl Rhs for NBody {
    fn dim(&self) -> usize {
        6 * self.bodies()
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        let n = self.bodies();
        let (x, v) = y.split_at(3 * n);
        let (dx, acc) = dy.split_at_mut(3 * n);
        dx.copy_from_slice(v);
        acc.fill(0.0);
        for i in 0..n {
            let xi = [x[3 * i], x[3 * i + 1], x[3 * i + 2]];
            for j in i + 1..n {
                let d = [x[3 * j] - xi[0], x[3 * j + 1] - xi[1], x[3 * j + 2] - xi[2]];
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + self.softening2;
                if r2 == 0.0 {
                    return Err(EvalError(format!("bodies {i} and {j} coincide")));
                }
                let inv3 = 1.0 / (r2 * r2.sqrt());
                for k in 0..3 {
                    acc[3 * i + k] += self.masses[j] * d[k] * inv3;
                    acc[3 * j + k] -= self.masses[i] * d[k] * inv3;
                }
            }
        }
        Ok(())
    }
}

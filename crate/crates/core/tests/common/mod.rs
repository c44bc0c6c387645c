//! Helpers shared by the integration tests: an extended-precision fixed-step
//! integrator used as an oracle, and log-log slope fitting.
#![allow(dead_code)]

use rkpairs_core::builders::{
    build_dc_euler_with, build_ex_euler_with, build_ex_midpoint_with, DcConfig, EmbeddedMethod,
    NodeFamily, VerifyMode,
};
use rkpairs_core::{rational, DoubleDouble, Rational, Scalar};

type D = DoubleDouble;

/// Every generated method of order at most `max_p`, with DC for both node
/// families and `theta` in {0, 1/2, 1}.
pub fn built_methods(max_p: u32) -> Vec<EmbeddedMethod> {
    let mut out = Vec::new();
    for p in 2..=max_p.min(12) {
        out.push(build_ex_euler_with(p, VerifyMode::Never).unwrap());
    }
    for p in (4..=max_p.min(18)).step_by(2) {
        out.push(build_ex_midpoint_with(p, VerifyMode::Never).unwrap());
    }
    let thetas: [Rational; 3] = [rational(0, 1), rational(1, 2), rational(1, 1)];
    for p in 3..=max_p.min(12) {
        for nodes in [NodeFamily::Equispaced, NodeFamily::ChebyshevLobatto] {
            for theta in &thetas {
                let cfg = DcConfig::new(p, theta.clone(), nodes);
                out.push(build_dc_euler_with(&cfg, VerifyMode::Never).unwrap());
            }
        }
    }
    out
}

fn cos(x: D) -> D {
    (D::PI / D::from_f64(2.0) - x).sin()
}

/// `y' = -y^3 + cos(tau) + sin(tau)^3`, `tau' = 1`.
fn cubic(y: [D; 2]) -> [D; 2] {
    let s = y[1].sin();
    [-(y[0] * y[0] * y[0]) + cos(y[1]) + s * s * s, D::ONE]
}

/// Double-double coefficients of a method, nonzeros only.
pub struct DdTableau {
    rows: Vec<Vec<(usize, D)>>,
    b: Vec<(usize, D)>,
}

impl DdTableau {
    pub fn new(m: &EmbeddedMethod) -> Self {
        let t = m.tableau();
        let nz = |v: &[rkpairs_core::Coefficient]| -> Vec<(usize, D)> {
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (j, c.to_dd()))
                .collect()
        };
        Self {
            rows: (0..t.stages()).map(|i| nz(t.a_row(i))).collect(),
            b: nz(t.b()),
        }
    }

    /// `n` fixed steps of the forced cubic from `(0, 0)` to `t_end`: the
    /// first component at `t_end` and the largest error over the grid.
    pub fn cubic_run(&self, t_end: f64, n: usize) -> (D, f64) {
        let h = D::from_f64(t_end) / D::from_f64(n as f64);
        let mut y = [D::ZERO, D::ZERO];
        let mut max_err: f64 = 0.0;
        let mut k = vec![[D::ZERO; 2]; self.rows.len()];
        for _ in 0..n {
            for (i, row) in self.rows.iter().enumerate() {
                let mut st = y;
                for &(j, a) in row {
                    for d in 0..2 {
                        st[d] = st[d] + h * a * k[j][d];
                    }
                }
                k[i] = cubic(st);
            }
            for &(j, b) in &self.b {
                for d in 0..2 {
                    y[d] = y[d] + h * b * k[j][d];
                }
            }
            max_err = max_err.max((y[0] - y[1].sin()).abs().to_f64());
        }
        (y[0], max_err)
    }
}

/// Exact end value `sin(t_end)` of the forced cubic.
pub fn cubic_exact(t_end: f64) -> D {
    D::from_f64(t_end).sin()
}

/// Step counts `round(2^(k/2))`, deduplicated.
pub fn step_ladder(max_n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for k in 2.. {
        let n = 2f64.powf(k as f64 / 2.0).round() as usize;
        if n > max_n {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SlopeFit {
    pub slope: f64,
    /// `(h, error)` pairs used in the fit.
    pub window: Vec<(f64, f64)>,
    pub floor: f64,
}

/// Least-squares slope of `log e` against `log h`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(h, e)| (a + h.ln(), b + e.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(h, e) in points {
        sxy += (h.ln() - mx) * (e.ln() - my);
        sxx += (h.ln() - mx).powi(2);
    }
    sxy / sxx
}

/// Fits the `width` finest points whose errors clear `guard` times the
/// smallest error seen (the floor) and `min_error`.
pub fn fit_finest(points: &[(f64, f64)], width: usize, guard: f64, min_error: f64) -> Option<SlopeFit> {
    let floor = points
        .iter()
        .map(|p| p.1)
        .filter(|e| *e > 0.0)
        .fold(f64::INFINITY, f64::min);
    let cut = (guard * floor).max(min_error);
    let mut usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, e)| e.is_finite() && e > cut)
        .collect();
    usable.sort_by(|a, b| a.0.total_cmp(&b.0));
    if usable.len() < width.max(2) {
        return None;
    }
    let window: Vec<(f64, f64)> = usable[..width].to_vec();
    Some(SlopeFit {
        slope: loglog_slope(&window),
        window,
        floor,
    })
}

/// One point of a convergence study.
#[derive(Clone, Copy, Debug)]
pub struct ErrorPoint {
    pub n: usize,
    pub h: f64,
    /// Largest error over the step grid.
    pub max_error: f64,
    /// Error at the final time.
    pub end_error: f64,
}

/// Double-double errors over the step ladder, stopping once the error is
/// below `stop` or has stopped decreasing.
pub fn dd_convergence(m: &EmbeddedMethod, t_end: f64, max_n: usize, stop: f64) -> Vec<ErrorPoint> {
    let tab = DdTableau::new(m);
    let exact = cubic_exact(t_end);
    let mut out: Vec<ErrorPoint> = Vec::new();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for n in step_ladder(max_n) {
        let (end, e) = tab.cubic_run(t_end, n);
        let h = t_end / n as f64;
        out.push(ErrorPoint {
            n,
            h,
            max_error: e,
            end_error: (end - exact).abs().to_f64(),
        });
        pts.push((h, e));
        if e < stop {
            break;
        }
        let k = pts.len();
        if k >= 4 && pts[k - 4..].windows(2).all(|w| w[1].1 > 0.5 * w[0].1) {
            break;
        }
    }
    out
}

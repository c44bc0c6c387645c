use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rkpairs_core::analysis::accuracy::principal_error_norm;
use rkpairs_core::builders::{
    build_dc_euler, build_ex_euler, build_ex_midpoint, load_reference_pair, DcConfig, EmbeddedMethod,
    NodeFamily,
};
use rkpairs_core::exact::order::ResidualConvention;
use rkpairs_core::exact::trees::tree;
use rkpairs_core::integrate::{
    integrate, ControllerConfig, ControllerMode, CountingRhs, EvalError, Executor, IntegrateOptions, Ivp,
    Rhs, Stepper,
};
use rkpairs_core::problems::{
    b1, exponential, problem_by_name, reference_solution, sb1, NBody, ThreeBody, SB1_MU, SB1_PERIOD,
    SB1_Y0,
};
use rkpairs_core::{integer, order_residuals, rational, Rational, Weights};

// Truncated power series in h with rational coefficients.
const DEG: usize = 6;
type Series = Vec<Rational>;

fn constant(c: &Rational) -> Series {
    let mut s = vec![Rational::zero(); DEG + 1];
    s[0] = c.clone();
    s
}

fn mul(a: &Series, b: &Series) -> Series {
    let mut out = vec![Rational::zero(); DEG + 1];
    for i in 0..=DEG {
        for j in 0..=DEG - i {
            out[i + j] += &a[i] * &b[j];
        }
    }
    out
}

/// Polynomial `f(y) = sum_k poly[k] y^k` applied to a series.
fn apply(poly: &[Rational], y: &Series) -> Series {
    let mut out = constant(&Rational::zero());
    for c in poly.iter().rev() {
        out = mul(&out, y);
        out[0] += c;
    }
    out
}

fn times_h(s: &Series) -> Series {
    let mut out = vec![Rational::zero(); DEG + 1];
    out[1..].clone_from_slice(&s[..DEG]);
    out
}

/// One step of the tableau as a series in `h`.
fn rk_series(m: &EmbeddedMethod, poly: &[Rational], y0: &Rational) -> Series {
    let t = m.tableau();
    let s = t.stages();
    let mut k: Vec<Series> = Vec::with_capacity(s);
    for i in 0..s {
        let mut acc = constant(&Rational::zero());
        for (j, kj) in k.iter().enumerate() {
            let a = t.a(i, j).to_rational();
            for d in 0..=DEG {
                acc[d] += &a * &kj[d];
            }
        }
        let mut y = times_h(&acc);
        y[0] += y0;
        k.push(apply(poly, &y));
    }
    let mut acc = constant(&Rational::zero());
    for (j, kj) in k.iter().enumerate() {
        let b = t.b()[j].to_rational();
        for d in 0..=DEG {
            acc[d] += &b * &kj[d];
        }
    }
    let mut y = times_h(&acc);
    y[0] += y0;
    y
}

/// Exact flow by Picard iteration: `y = y0 + int_0^h f(y)`.
fn exact_series(poly: &[Rational], y0: &Rational) -> Series {
    let mut y = constant(y0);
    for _ in 0..=DEG {
        let f = apply(poly, &y);
        let mut next = constant(y0);
        for d in 0..DEG {
            next[d + 1] = &f[d] / Rational::from_integer((d as i64 + 1).into());
        }
        y = next;
    }
    y
}

/// `F(t)(y0)` for scalar `f`: `f^(k)` at the root times the children's values.
fn elementary_differential(id: usize, derivs: &[Rational]) -> Rational {
    let t = tree(id);
    let k = t.children().len();
    t.children()
        .iter()
        .fold(derivs[k].clone(), |acc, &c| acc * elementary_differential(c, derivs))
}

fn derivatives(poly: &[Rational], y0: &Rational) -> Vec<Rational> {
    let mut p = poly.to_vec();
    let mut out = Vec::new();
    for _ in 0..8 {
        out.push(p.iter().rev().fold(Rational::zero(), |acc, c| acc * y0 + c));
        p = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer((i as i64).into()))
            .collect();
        if p.is_empty() {
            p.push(Rational::zero());
        }
    }
    out
}

#[test]
fn ex_euler_4_local_error_matches_series_expansion() {
    let m = build_ex_euler(4).unwrap();
    let c5 = principal_error_norm(m.tableau()).unwrap();
    assert!(c5 > 0.0);
    let res = order_residuals(m.tableau(), Weights::Principal, 5, ResidualConvention::Plain).unwrap();
    let norm = res.iter().map(|r| rkpairs_core::Scalar::to_f64(&r.value).powi(2)).sum::<f64>().sqrt();
    assert!((norm - c5).abs() <= 1e-15 * c5);

    let cases: [(Vec<Rational>, Rational); 4] = [
        (vec![integer(0), integer(0), integer(1)], integer(1)),
        (vec![rational(1, 2), integer(-1), integer(1), rational(1, 3), rational(1, 4)], rational(1, 3)),
        (vec![integer(2), integer(0), integer(0), integer(-1)], rational(-1, 2)),
        (vec![integer(0), integer(1)], integer(1)),
    ];
    for (poly, y0) in &cases {
        let le: Vec<Rational> = rk_series(&m, poly, y0)
            .iter()
            .zip(exact_series(poly, y0))
            .map(|(a, b)| a - b)
            .collect();
        for (d, c) in le.iter().enumerate().take(5) {
            assert!(c.is_zero(), "h^{d} coefficient {c}");
        }
        let derivs = derivatives(poly, y0);
        let predicted = res.iter().fold(Rational::zero(), |acc, r| {
            acc + r.value.to_rational() * elementary_differential(r.tree.id(), &derivs) / r.tree.sigma_rational()
        });
        assert_eq!(le[5], predicted, "f = {poly:?}");
    }
    // y' = y isolates the tall tree: R(z) - e^z = (r_5 - 1/120) z^5 + ...
    let tall = res.iter().find(|r| r.tree.children().len() <= 1 && r.tree.gamma() == 120).unwrap();
    let le = rk_series(&m, &[integer(0), integer(1)], &integer(1));
    assert_eq!(le[5].clone() - rational(1, 120), tall.value.to_rational());
}

/// Effective potential of the rotating frame, coded separately from the
/// right-hand side.
fn omega(x: f64, y: f64) -> f64 {
    let mu = SB1_MU;
    let r1 = ((x + mu).powi(2) + y * y).sqrt();
    let r2 = ((x - 1.0 + mu).powi(2) + y * y).sqrt();
    0.5 * (x * x + y * y) + (1.0 - mu) / r1 + mu / r2
}

fn central_difference(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h)
}

#[test]
fn sb1_forces_are_the_potential_gradient() {
    let f = ThreeBody { mu: SB1_MU };
    let points = [
        SB1_Y0,
        [0.5, 0.4, 0.3, -0.2],
        [-0.6, -0.7, 1.0, 0.5],
        [1.5, 0.2, -0.1, 0.9],
        [0.0, 1.0, 0.0, 0.0],
    ];
    for y in points {
        let mut dy = [0.0; 4];
        f.eval(&y, &mut dy).unwrap();
        assert_eq!((dy[0], dy[1]), (y[2], y[3]));
        let gx = central_difference(|x| omega(x, y[1]), y[0], 1e-4);
        let gy = central_difference(|v| omega(y[0], v), y[1], 1e-4);
        // Coriolis terms are velocity-only.
        assert!((dy[2] - 2.0 * y[3] - gx).abs() < 1e-10, "{y:?}");
        assert!((dy[3] + 2.0 * y[2] - gy).abs() < 1e-10, "{y:?}");
    }
}

#[test]
fn nbody_forces_are_the_potential_gradient() {
    let bodies = NBody::from_parts(
        vec![0.5, 0.3, 0.2],
        1e-2,
        vec![0.0, 0.0, 0.0, 1.0, 0.2, -0.1, -0.3, 0.8, 0.5],
        vec![0.0; 9],
    );
    let y = bodies.initial_state();
    let mut dy = vec![0.0; 18];
    bodies.eval(&y, &mut dy).unwrap();
    for i in 0..3 {
        for d in 0..3 {
            let k = 3 * i + d;
            let grad = central_difference(
                |v| {
                    let mut z = y.clone();
                    z[k] = v;
                    bodies.energy(&z)
                },
                y[k],
                1e-4,
            );
            assert!((dy[9 + k] + grad / bodies.masses()[i]).abs() < 1e-10, "body {i} axis {d}");
        }
    }
}

fn order_eight_methods() -> Vec<EmbeddedMethod> {
    vec![
        build_ex_euler(8).unwrap(),
        build_ex_midpoint(8).unwrap(),
        build_dc_euler(&DcConfig::new(8, integer(0), NodeFamily::ChebyshevLobatto)).unwrap(),
        load_reference_pair("pd8(7)").unwrap(),
    ]
}

fn adaptive(eps: f64) -> IntegrateOptions {
    IntegrateOptions::adaptive(ControllerConfig::new(eps, 1e-3))
}

#[test]
fn sb1_orbit_is_periodic() {
    let reference = reference_solution(&sb1(), None).unwrap();
    let gap = reference.iter().zip(SB1_Y0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-8, "reference gap {gap}");
    let p = sb1();
    for m in order_eight_methods() {
        let (_, rec) = integrate(&m, &p.ivp, &adaptive(1e-10).without_trajectory()).unwrap();
        assert_eq!(rec.t_final, SB1_PERIOD);
        let gap = rec.final_state.iter().zip(SB1_Y0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-6, "{}: {gap}", m.label());
    }
}

#[test]
fn exponential_to_tolerance() {
    let ivp = exponential().with_reference(None).unwrap();
    let (_, rec) = integrate(&build_ex_midpoint(8).unwrap(), &ivp, &adaptive(1e-10)).unwrap();
    assert!(rec.final_error.unwrap() < 1e-8);
    assert!((rec.final_state[0] - std::f64::consts::E).abs() < 1e-8);
}

#[test]
fn b1_stays_positive() {
    let p = b1();
    let methods = [build_ex_euler(4).unwrap(), build_ex_midpoint(6).unwrap(), load_reference_pair("bs5").unwrap()];
    for m in &methods {
        for eps in [1e-3, 1e-4, 1e-5, 1e-6] {
            let (traj, _) = integrate(m, &p.ivp, &adaptive(eps)).unwrap();
            assert!(traj.y.iter().flatten().all(|&v| v > 0.0), "{} at {eps}", m.label());
        }
        // First integral of the population model.
        let h = |y: &[f64]| y[0] - y[0].ln() + 2.0 * y[1] - 2.0 * y[1].ln();
        let (traj, _) = integrate(m, &p.ivp, &adaptive(1e-10)).unwrap();
        let h0 = h(&traj.y[0]);
        let drift = traj.y.iter().map(|y| (h(y) - h0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-7 * h0.abs(), "{}: {drift}", m.label());
    }
}

#[test]
fn nbody_conserves_energy_and_momentum() {
    // Well-separated bodies without softening.
    let bodies = NBody::from_parts(
        vec![0.25; 4],
        0.0,
        vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.1, 0.0, -1.0, -0.1],
        vec![0.0, 0.3, 0.0, 0.0, -0.3, 0.0, -0.3, 0.0, 0.05, 0.3, 0.0, -0.05],
    );
    let ivp = Ivp {
        y0: bodies.initial_state(),
        rhs: Arc::new(bodies.clone()),
        t0: 0.0,
        t_end: 2.0,
        reference: None,
    };
    let e0 = bodies.energy(&ivp.y0);
    for m in [build_ex_midpoint(8).unwrap(), build_ex_euler(6).unwrap()] {
        let (traj, _) = integrate(&m, &ivp, &adaptive(1e-10)).unwrap();
        for y in &traj.y {
            assert!(((bodies.energy(y) - e0) / e0).abs() < 1e-8, "{}", m.label());
            assert!(bodies.momentum(y).iter().all(|p| p.abs() < 1e-14), "{}", m.label());
        }
    }

    // The benchmark problem, softened, over its default interval.
    let p = problem_by_name("nbody:20").unwrap();
    let cfg = rkpairs_core::problems::NBodyConfig::new(20, 1);
    let generated = NBody::new(&cfg);
    let (_, rec) = integrate(&build_ex_midpoint(10).unwrap(), &p.ivp, &adaptive(1e-10)).unwrap();
    let (e0, e1) = (generated.energy(&p.ivp.y0), generated.energy(&rec.final_state));
    assert!(((e1 - e0) / e0).abs() < 1e-8);
}

#[test]
fn counting_wrapper_agrees_with_recorded_work() {
    let methods = [
        build_ex_euler(5).unwrap(),
        build_ex_midpoint(6).unwrap(),
        build_dc_euler(&DcConfig::new(4, rational(1, 2), NodeFamily::Equispaced)).unwrap(),
        load_reference_pair("bs5").unwrap(),
    ];
    for m in &methods {
        for executor in [Executor::Serial, Executor::Parallel { workers: 3 }] {
            let counter = Arc::new(CountingRhs::new(ThreeBody { mu: SB1_MU }));
            let ivp = Ivp { rhs: counter.clone(), ..sb1().ivp };
            let opts = adaptive(1e-7).with_executor(executor).without_trajectory();
            let (_, rec) = integrate(m, &ivp, &opts).unwrap();
            assert_eq!(counter.count(), rec.f_evals, "{}", m.label());
            let s_seq = m.graph().seq_stages().unwrap() as u64;
            assert_eq!(rec.f_evals_seq, (rec.steps_accepted + rec.steps_rejected) * s_seq);
        }
    }
    // Fixed steps: exactly ceil(T/h) steps.
    let m = build_ex_euler(3).unwrap();
    let counter = Arc::new(CountingRhs::new(ThreeBody { mu: SB1_MU }));
    let ivp = Ivp { rhs: counter.clone(), ..sb1().ivp };
    let (_, rec) = integrate(&m, &ivp, &IntegrateOptions::fixed(0.01)).unwrap();
    assert_eq!(rec.steps_accepted, (SB1_PERIOD / 0.01).ceil() as u64);
    assert_eq!(counter.count(), rec.steps_accepted * m.stages() as u64);
}

#[test]
fn runs_are_deterministic() {
    let p = sb1();
    let m = build_ex_midpoint(8).unwrap();
    for mode in [ControllerMode::I, ControllerMode::Pi { beta1: None, beta2: None }] {
        let opts = IntegrateOptions::adaptive(ControllerConfig::new(1e-9, 1e-3).with_mode(mode));
        let (a, ra) = integrate(&m, &p.ivp, &opts).unwrap();
        let (b, rb) = integrate(&m, &p.ivp, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!((ra.f_evals, &ra.final_state), (rb.f_evals, &rb.final_state));
        let par = opts.clone().with_executor(Executor::Parallel { workers: 4 });
        let (c, _) = integrate(&m, &p.ivp, &par).unwrap();
        assert_eq!(a, c);
    }
}

/// Records the start and end of every evaluation on a shared clock,
/// together with the input state.
struct Tracer {
    inner: ThreeBody,
    clock: AtomicU64,
    log: Mutex<Vec<(u64, u64, Vec<f64>)>>,
}

impl Rhs for Tracer {
    fn dim(&self) -> usize {
        4
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        let start = self.clock.fetch_add(1, Ordering::SeqCst);
        let out = self.inner.eval(y, dy);
        std::thread::yield_now();
        let end = self.clock.fetch_add(1, Ordering::SeqCst);
        self.log.lock().unwrap().push((start, end, y.to_vec()));
        out
    }
}

fn trace_step(m: &EmbeddedMethod, executor: Executor) -> Vec<(u64, u64, Vec<f64>)> {
    let tracer = Tracer {
        inner: ThreeBody { mu: SB1_MU },
        clock: AtomicU64::new(0),
        log: Mutex::new(Vec::new()),
    };
    let mut st = Stepper::new(m, 4, executor).unwrap();
    let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
    st.step(&tracer, &SB1_Y0, 0.05, &mut a, &mut b).unwrap();
    tracer.log.into_inner().unwrap()
}

#[test]
fn parallel_trace_respects_stage_graph() {
    let methods = [
        build_ex_midpoint(8).unwrap(),
        build_ex_euler(6).unwrap(),
        build_dc_euler(&DcConfig::new(5, integer(0), NodeFamily::Equispaced)).unwrap(),
    ];
    for m in &methods {
        // Serial evaluation order is stage order, which names each input.
        let serial = trace_step(m, Executor::Serial);
        assert_eq!(serial.len(), m.stages());
        let stage_of = |y: &[f64]| -> Vec<usize> {
            serial.iter().enumerate().filter(|(_, e)| e.2 == y).map(|(i, _)| i).collect()
        };
        for workers in [2, 3, 5] {
            let par = trace_step(m, Executor::Parallel { workers });
            assert_eq!(par.len(), m.stages());
            let mut timing = vec![None; m.stages()];
            for (start, end, y) in &par {
                let candidates = stage_of(y);
                let i = candidates
                    .into_iter()
                    .find(|&i| timing[i].is_none())
                    .expect("every parallel input matches a serial stage");
                timing[i] = Some((*start, *end));
            }
            for i in 0..m.stages() {
                let (start, _) = timing[i].unwrap();
                for &j in m.graph().preds(i) {
                    let (_, end_j) = timing[j].unwrap();
                    assert!(end_j < start, "{}: stage {i} began before {j} finished", m.label());
                }
            }
        }
    }
}

#[test]
fn one_worker_evaluates_the_same_stages() {
    let m = build_ex_euler(4).unwrap();
    let a = trace_step(&m, Executor::Serial);
    let b = trace_step(&m, Executor::Parallel { workers: 1 });
    // Same evaluations; one worker walks the levels rather than stage order.
    let inputs = |t: &[(u64, u64, Vec<f64>)]| {
        let mut v: Vec<Vec<u64>> = t.iter().map(|e| e.2.iter().map(|x| x.to_bits()).collect()).collect();
        v.sort();
        v
    };
    assert_eq!(inputs(&a), inputs(&b));
}

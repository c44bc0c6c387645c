use std::collections::HashMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rkpairs_core::analysis::schedule::list_schedule;
use rkpairs_core::analysis::stability::{certify_imag, certify_real};
use rkpairs_core::analysis::{build_schedule, stability_report, StabilityReport, StageGraph};
use rkpairs_core::builders::{
    build_dc_euler_with, build_ex_euler_with, build_ex_midpoint_with, DcConfig, EmbeddedMethod,
    NodeFamily, VerifyMode,
};
use rkpairs_core::exact::order::ResidualConvention;
use rkpairs_core::exact::rational::{format_rational, parse_literal, Literal};
use rkpairs_core::integrate::{control_step, Controller, ControllerConfig, ControllerMode};
use rkpairs_core::{
    order_residuals, parse_tableau, rational, serialize_tableau, trees_of_order, Coefficient,
    DoubleDouble, Rational, Tableau, Weights,
};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=9).prop_map(|(n, d)| rational(n, d))
}

fn exact_tableau() -> impl Strategy<Value = Tableau> {
    (2usize..=5).prop_flat_map(|s| {
        let rows: Vec<_> = (0..s).map(|i| prop::collection::vec(small_rational(), i)).collect();
        (
            rows,
            prop::collection::vec(small_rational(), s),
            prop::collection::vec(small_rational(), s),
        )
            .prop_map(|(a, b, bh)| {
                let c = |v: Vec<Rational>| v.into_iter().map(Coefficient::Exact).collect::<Vec<_>>();
                Tableau::new("random", a.into_iter().map(c).collect(), c(b), c(bh), 2, 1).unwrap()
            })
    })
}

fn exact(c: &Coefficient) -> Rational {
    c.to_rational()
}

fn dd_exact(d: DoubleDouble) -> Rational {
    d.to_rational().expect("finite")
}

fn rel_err(approx: &Rational, exact: &Rational) -> f64 {
    use rkpairs_core::Scalar;
    if Zero::is_zero(exact) {
        return Scalar::to_f64(approx).abs();
    }
    Scalar::to_f64(&((approx - exact) / exact)).abs()
}

// Rooted trees by brute force: every parent array with parent[i] < i is a
// monotone labelling; each unlabelled tree t of order n occurs
// n! / (sigma(t) gamma(t)) times.
struct Brute {
    canon: String,
    parents: Vec<usize>,
    gamma: u64,
}

fn canon_of(children: &[Vec<usize>], v: usize) -> String {
    let mut parts: Vec<String> = children[v].iter().map(|&c| canon_of(children, c)).collect();
    parts.sort();
    format!("({})", parts.concat())
}

fn brute_trees(n: usize) -> HashMap<String, (Brute, u64)> {
    let mut out: HashMap<String, (Brute, u64)> = HashMap::new();
    let mut parents = vec![0usize; n];
    fn rec(i: usize, n: usize, parents: &mut Vec<usize>, out: &mut HashMap<String, (Brute, u64)>) {
        if i == n {
            let mut children = vec![Vec::new(); n];
            for v in 1..n {
                children[parents[v]].push(v);
            }
            let canon = canon_of(&children, 0);
            let mut size = vec![1u64; n];
            for v in (1..n).rev() {
                size[parents[v]] += size[v];
            }
            let gamma = size.iter().product();
            out.entry(canon.clone())
                .or_insert_with(|| (Brute { canon, parents: parents.clone(), gamma }, 0))
                .1 += 1;
            return;
        }
        for p in 0..i {
            parents[i] = p;
            rec(i + 1, n, parents, out);
        }
    }
    rec(1, n, &mut parents, &mut out);
    out
}

fn library_canon(id: usize) -> String {
    let t = rkpairs_core::exact::trees::tree(id);
    let mut parts: Vec<String> = t.children().iter().map(|&c| library_canon(c)).collect();
    parts.sort();
    format!("({})", parts.concat())
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// `Phi(t)` as the sum over all stage assignments of the vertices.
fn brute_phi(t: &Tableau, parents: &[usize], w: &[Coefficient]) -> Rational {
    let s = t.stages();
    let n = parents.len();
    let mut total = Rational::zero();
    let mut idx = vec![0usize; n];
    loop {
        let mut term = exact(&w[idx[0]]);
        for v in 1..n {
            term *= exact(&t.a(idx[parents[v]], idx[v]));
        }
        total += term;
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < s {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return total;
        }
    }
}

#[test]
fn trees_match_brute_force_up_to_order_seven() {
    for n in 1..=7u32 {
        let brute = brute_trees(n as usize);
        let lib = trees_of_order(n).unwrap();
        assert_eq!(lib.len(), brute.len(), "order {n}");
        for t in lib {
            let (b, alpha) = &brute[&library_canon(t.id())];
            assert_eq!(t.gamma(), b.gamma, "{}", b.canon);
            assert_eq!(t.sigma() * t.gamma() * alpha, factorial(u64::from(n)), "{}", b.canon);
        }
    }
}

fn built_methods() -> &'static [EmbeddedMethod] {
    static M: OnceLock<Vec<EmbeddedMethod>> = OnceLock::new();
    M.get_or_init(|| {
        let mut v = Vec::new();
        for p in 2..=8 {
            v.push(build_ex_euler_with(p, VerifyMode::Never).unwrap());
        }
        for p in [4, 6, 8] {
            v.push(build_ex_midpoint_with(p, VerifyMode::Never).unwrap());
        }
        for p in 3..=6 {
            for theta in [rational(0, 1), rational(1, 2), rational(1, 1)] {
                let cfg = DcConfig::new(p, theta, NodeFamily::Equispaced);
                v.push(build_dc_euler_with(&cfg, VerifyMode::Never).unwrap());
            }
        }
        v
    })
}

fn reports() -> &'static [StabilityReport] {
    static R: OnceLock<Vec<StabilityReport>> = OnceLock::new();
    R.get_or_init(|| built_methods().iter().map(|m| stability_report(m.tableau())).collect())
}

fn poly_at(q: &[Rational], re: &Rational, im: &Rational) -> (Rational, Rational) {
    let (mut a, mut b) = (Rational::zero(), Rational::zero());
    for c in q.iter().rev() {
        let na = &a * re - &b * im + c;
        let nb = &a * im + &b * re;
        a = na;
        b = nb;
    }
    (a, b)
}

#[test]
fn stability_certificates_hold() {
    for (m, r) in built_methods().iter().zip(reports()) {
        assert!(certify_imag(&r.polynomial, &r.imag), "{}", m.label());
        assert!(certify_real(&r.polynomial, &r.real), "{}", m.label());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_literals_round_trip(r in small_rational(), k in 0u32..6) {
        let scaled = r / Rational::from_integer(10i64.pow(k).into());
        let text = format_rational(&scaled);
        prop_assert_eq!(parse_literal(&text).unwrap(), Literal::Exact(scaled));
    }

    #[test]
    fn decimal_literals_are_exact(m in -99999i64..99999, e in -20i32..20) {
        let text = format!("{m}e{e}");
        let want = if e >= 0 {
            Rational::from_integer((m as i128 * 10i128.pow(e as u32)).into())
        } else {
            Rational::new(m.into(), 10i128.pow((-e) as u32).into())
        };
        prop_assert_eq!(parse_literal(&text).unwrap(), Literal::Decimal(want));
    }

    #[test]
    fn double_double_arithmetic(a in small_rational(), b in small_rational(), k in 1i64..1000) {
        prop_assume!(!Zero::is_zero(&b));
        // Non-dyadic operands, so both words are in play.
        let x = DoubleDouble::from_rational(&(a / rational(3 * k, 1)));
        let y = DoubleDouble::from_rational(&(b * rational(7, k)));
        let (ra, rb) = (dd_exact(x), dd_exact(y));
        prop_assert!(rel_err(&dd_exact(x + y), &(&ra + &rb)) < 1e-30 || (&ra + &rb).is_zero());
        prop_assert!(rel_err(&dd_exact(x * y), &(&ra * &rb)) < 1e-30);
        prop_assert!(rel_err(&dd_exact(x / y), &(&ra / &rb)) < 1e-30);
        let third = DoubleDouble::from_rational(&rational(1, 3));
        prop_assert!(rel_err(&dd_exact(third), &rational(1, 3)) < 1e-31);
    }

    #[test]
    fn tableau_text_round_trip(t in exact_tableau()) {
        let text = serialize_tableau(&t);
        let back = parse_tableau(&text).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn elementary_weights_match_brute_force(t in exact_tableau(), q in 1u32..=5) {
        let brute = brute_trees(q as usize);
        for which in [Weights::Principal, Weights::Embedded] {
            let w = t.weights(which).to_vec();
            for r in order_residuals(&t, which, q, ResidualConvention::Plain).unwrap() {
                let (b, _) = &brute[&library_canon(r.tree.id())];
                let want = brute_phi(&t, &b.parents, &w) - Rational::new(1.into(), b.gamma.into());
                prop_assert_eq!(exact(&r.value), want);
            }
        }
    }

    #[test]
    fn imaginary_interval_is_stable_inside(i in 0usize..32, k in 0i64..=64) {
        let r = &reports()[i % reports().len()];
        let q = r.polynomial.to_rationals();
        let y = &r.imag.inner * rational(k, 64);
        let (re, im) = poly_at(&q, &Rational::zero(), &y);
        prop_assert!(&re * &re + &im * &im <= Rational::one());
    }

    #[test]
    fn real_interval_is_stable_inside(i in 0usize..32, k in 0i64..=64) {
        let r = &reports()[i % reports().len()];
        let q = r.polynomial.to_rationals();
        let x = -(&r.real.inner * rational(k, 64));
        let (re, _) = poly_at(&q, &x, &Rational::zero());
        prop_assert!(&re * &re <= Rational::one());
    }

    #[test]
    fn list_schedules_are_valid(
        n in 2usize..40,
        density in 0.0f64..0.5,
        workers in 1usize..8,
        seed in any::<u64>(),
    ) {
        // Random DAG over stages 0..n, each stage feeding the output node n.
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut edges = Vec::new();
        for j in 1..n {
            for i in 0..j {
                if next() < density {
                    edges.push((i, j));
                }
            }
        }
        edges.extend((0..n).map(|i| (i, n)));
        let g = StageGraph::from_edges(n + 1, &edges, vec![String::new(); n + 1]).unwrap();
        let sched = list_schedule(&g, workers).unwrap();
        sched.validate(&g).unwrap();
        let cp = g.critical_path().unwrap();
        prop_assert!(sched.makespan() >= cp);
        prop_assert!(sched.makespan() >= n.div_ceil(workers));
        for level in sched.levels() {
            prop_assert!(level.len() <= workers);
            for &i in &level {
                for &p in g.preds(i) {
                    prop_assert!(sched.slot(p) < sched.slot(i));
                }
            }
        }
        if workers == 1 {
            prop_assert_eq!(sched.makespan(), n);
        }
    }

    #[test]
    fn method_schedules_are_valid(i in 0usize..32, workers in 1usize..10) {
        let m = &built_methods()[i % built_methods().len()];
        let sched = build_schedule(m, workers).unwrap();
        sched.validate(m.graph()).unwrap();
        prop_assert!(sched.makespan() >= m.graph().seq_stages().unwrap());
    }

    #[test]
    fn controller_invariants(
        eps_exp in -12i32..-2,
        h in 1e-8f64..1.0,
        ratio_exp in -6.0f64..6.0,
        p_hat in 1u32..12,
        pi in any::<bool>(),
    ) {
        let eps = 10f64.powi(eps_exp);
        let delta = eps * 10f64.powf(ratio_exp);
        let mut cfg = ControllerConfig::new(eps, 1e-3);
        if pi {
            cfg = cfg.with_mode(ControllerMode::Pi { beta1: None, beta2: None });
        }
        let (acc, h_next) = control_step(&cfg, h, delta, p_hat);
        prop_assert_eq!(acc, delta <= eps);
        prop_assert!(h_next >= cfg.kappa_min * h * (1.0 - 1e-15));
        prop_assert!(h_next <= cfg.kappa_max * h * (1.0 + 1e-15));
        if !acc {
            prop_assert!(h_next < h);
        }
        // Larger estimates never give larger steps.
        let (_, h_bigger) = control_step(&cfg, h, delta * 2.0, p_hat);
        prop_assert!(h_bigger <= h_next);
        let mut ctl = Controller::new(cfg.clone(), p_hat);
        ctl.propose(h, eps * 0.5, true);
        let (acc2, h2) = ctl.propose(h, delta, true);
        prop_assert_eq!(acc2, delta <= eps);
        prop_assert!(h2 >= cfg.kappa_min * h * (1.0 - 1e-15) && h2 <= cfg.kappa_max * h * (1.0 + 1e-15));
        if !acc2 {
            prop_assert!(h2 < h);
        }
    }
}

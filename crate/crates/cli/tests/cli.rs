use std::collections::HashMap;
use std::process::{Command, Output};

use rkpairs_cli::method::MethodSpec;
use rkpairs_cli::output::{ANALYZE_HEADER, BENCH_HEADER, INTEGRATE_HEADER};
use rkpairs_cli::sweep::{run_sweep, ExecutorKind, SweepPlan};
use rkpairs_core::exact::parse_tableau;

fn rkpairs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkpairs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a CSV with `#` comment lines, keyed by header.
fn table(text: &str) -> Vec<HashMap<String, String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    rdr.records()
        .map(|r| header.iter().cloned().zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn f(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

#[test]
fn golden_headers() {
    assert_eq!(
        ANALYZE_HEADER.join(","),
        "label,s,s_seq,S,P,E,I_real,I_imag,C_p1,eta,eta_parallel,defect"
    );
    assert_eq!(
        INTEGRATE_HEADER.join(","),
        "method,problem,tol,h0,fixed_step,executor,workers,status,steps_accepted,steps_rejected,\
         f_evals,f_evals_seq,wall_time,t_final,final_error,final_state"
    );
    assert_eq!(
        BENCH_HEADER.join(","),
        "method,problem,tol,error,f_evals,f_evals_seq,steps_accepted,steps_rejected,wall_time,\
         workers,speedup,failed,trend_violation,failure"
    );
    let o = rkpairs(&["analyze", "ex-euler", "2"]);
    assert_eq!(stdout(&o).lines().next().unwrap(), ANALYZE_HEADER.join(","));
    let o = rkpairs(&["bench", "--methods", "ex-euler:3", "--problem", "exp", "--tols", "1e-4", "--reps", "1"]);
    let text = stdout(&o);
    let first_data = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first_data, BENCH_HEADER.join(","));
}

#[test]
fn plotting_schemas_match_headers() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../figure_kit/figure_kit/schemas.json");
    let text = std::fs::read_to_string(path).unwrap();
    let schemas: HashMap<String, Vec<String>> = serde_json::from_str(&text).unwrap();
    assert_eq!(schemas["analyze"], ANALYZE_HEADER);
    assert_eq!(schemas["integrate"], INTEGRATE_HEADER);
    assert_eq!(schemas["bench"], BENCH_HEADER);
}

#[test]
fn build_examples() {
    let o = rkpairs(&["build", "ex-midpoint", "8"]);
    assert!(o.status.success());
    assert_eq!(parse_tableau(&stdout(&o)).unwrap().stages(), 17);

    let o = rkpairs(&["build", "dc", "4", "--theta", "0"]);
    assert!(o.status.success());
    assert_eq!(parse_tableau(&stdout(&o)).unwrap().stages(), 10);

    let o = rkpairs(&["build", "ex-midpoint", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("even order"), "{}", stderr(&o));
}

#[test]
fn build_to_file_and_reload_from_tableau_dir() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.rkt");
    let o = rkpairs(&["build", "dc:3:1/2:equi", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = rkpairs(&["--tableau-dir", dir.path().to_str().unwrap(), "analyze", "mine", "dc:3:1/2:equi"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = table(&stdout(&o));
    assert_eq!(rows.len(), 2);
    for col in ["s", "s_seq", "S", "P", "I_real", "I_imag", "C_p1", "defect"] {
        assert_eq!(rows[0][col], rows[1][col], "{col}");
    }
    let o = rkpairs(&["analyze", "no-such-pair"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_examples() {
    let o = rkpairs(&["analyze", "ex-euler", "4"]);
    let r = &table(&stdout(&o))[0];
    assert!((f(r, "I_imag") - 2.83).abs() <= 0.005, "{}", r["I_imag"]);

    let o = rkpairs(&["analyze", "dc", "4", "--theta", "1"]);
    assert_eq!(f(&table(&stdout(&o))[0], "S"), 1.0);

    let o = rkpairs(&["analyze", "ex-midpoint", "10"]);
    assert_eq!(table(&stdout(&o))[0]["P"], "3");
}

#[test]
fn analyze_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let o = rkpairs(&["--csv", path.to_str().unwrap(), "analyze", "ex-euler:4", "ex-midpoint:6"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let rows = table(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["label"], "ex-midpoint-6");
    assert_eq!(rows[1]["P"], "2");
}

#[test]
fn integrate_exponential() {
    let o = rkpairs(&[
        "integrate", "--method", "ex-midpoint", "--order", "8", "--problem", "exp", "--tol", "1e-10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = &table(&stdout(&o))[0];
    assert!(f(r, "final_error") < 1e-8);
    assert_eq!(r["status"], "ok");
    assert_eq!(f(r, "t_final"), 1.0);
    let s_seq = 8;
    let attempts: u64 = r["steps_accepted"].parse::<u64>().unwrap() + r["steps_rejected"].parse::<u64>().unwrap();
    assert_eq!(r["f_evals_seq"].parse::<u64>().unwrap(), attempts * s_seq);
    assert_eq!(r["f_evals"].parse::<u64>().unwrap(), attempts * 17);
}

#[test]
fn integrate_executors_agree() {
    let base = ["integrate", "--method", "ex-euler:6", "--problem", "sb1", "--tol", "1e-7"];
    let serial = table(&stdout(&rkpairs(&base)));
    let mut args = base.to_vec();
    args.extend(["--executor", "parallel", "--workers", "3"]);
    let parallel = table(&stdout(&rkpairs(&args)));
    assert_eq!(parallel[0]["workers"], "3");
    for col in ["final_state", "final_error", "f_evals", "steps_rejected"] {
        assert_eq!(serial[0][col], parallel[0][col], "{col}");
    }
}

#[test]
fn exit_codes() {
    let o = rkpairs(&["integrate", "--method", "ex-euler:2", "--problem", "b1", "--fixed-step", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let r = &table(&stdout(&o))[0];
    assert!(r["status"].contains("non-finite"));

    assert_eq!(rkpairs(&["integrate", "--method", "ex-euler:4", "--problem", "nope"]).status.code(), Some(1));
    assert_eq!(rkpairs(&["integrate", "--method", "ex-euler:4", "--problem", "exp", "--tol", "-1"]).status.code(), Some(1));
    assert_eq!(rkpairs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rkpairs(&["bench", "--problem", "exp"]).status.code(), Some(1));
    assert_eq!(rkpairs(&["bench", "--methods", "ex-euler:4", "--tols", "1e-5,1e-4"]).status.code(), Some(1));
    assert_eq!(rkpairs(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_provenance_and_determinism() {
    let args = [
        "--seed", "4", "bench", "--methods", "ex-euler:4,dc:4", "--problem", "nbody:6", "--tols", "1e-4,1e-6,1e-8",
        "--reps", "2",
    ];
    let a = stdout(&rkpairs(&args));
    let b = stdout(&rkpairs(&args));
    let header = |t: &str| t.lines().filter(|l| l.starts_with('#')).map(String::from).collect::<Vec<_>>();
    assert_eq!(header(&a), header(&b));
    assert!(a.contains("# seed=4\n"));
    assert!(header(&a).iter().any(|l| l.starts_with("# config=") && l.len() == 9 + 64));
    let (ta, tb) = (table(&a), table(&b));
    assert_eq!(ta.len(), 6);
    for (x, y) in ta.iter().zip(&tb) {
        assert_eq!(x["problem"], "nbody:6:4");
        for col in ["error", "f_evals", "f_evals_seq", "steps_accepted", "steps_rejected"] {
            assert_eq!(x[col], y[col], "{col}");
        }
    }
    let other = table(&stdout(&rkpairs(&[
        "--seed", "5", "bench", "--methods", "ex-euler:4", "--problem", "nbody:6", "--tols", "1e-4", "--reps", "1",
    ])));
    assert_ne!(other[0]["error"], ta[0]["error"]);
}

#[test]
fn sb1_order_eight_sweep_is_monotone() {
    let plan = SweepPlan {
        repetitions: 1,
        ..SweepPlan::new(
            vec!["ex-euler:8".parse().unwrap(), "ex-midpoint:8".parse().unwrap(), "dc:8".parse().unwrap()],
            "sb1",
        )
    };
    let rows = run_sweep(&plan, None, None).unwrap();
    assert_eq!(rows.len(), 27);
    for r in &rows {
        assert!(!r.failed() && !r.trend_violation, "{r:?}");
    }
    for w in rows.chunks(9) {
        assert!(w[8].error.unwrap() < 1e-3 * w[0].error.unwrap());
        assert!(w[8].f_evals > w[0].f_evals);
    }
}

#[test]
fn failed_cells_become_rows() {
    let mut plan = SweepPlan::new(vec![MethodSpec::ExMidpoint(8), MethodSpec::ExEuler(4)], "sb1");
    plan.tolerances = vec![1e-6, 1e-300];
    plan.repetitions = 1;
    let rows = run_sweep(&plan, None, None).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(!rows[0].failed());
    assert!(rows[1].failed());
    assert!(rows[1].failure.as_deref().unwrap().contains("step size"));
    assert_eq!(rows[1].error, None);
    assert_eq!(rows[1].record()[11], "1");
    assert!(!rows[2].failed());
}

#[test]
fn speedup_column_is_ratio_of_wall_times() {
    let mut plan = SweepPlan::new(vec![MethodSpec::ExMidpoint(10)], "nbody:30");
    plan.tolerances = vec![1e-5, 1e-7];
    plan.executor = ExecutorKind::Parallel;
    plan.workers = vec![1, 3];
    plan.repetitions = 1;
    let rows = run_sweep(&plan, None, None).unwrap();
    assert_eq!(rows.len(), 4);
    for (one, three) in rows[..2].iter().zip(&rows[2..]) {
        assert_eq!((one.workers, three.workers), (1, 3));
        assert_eq!(one.speedup, Some(1.0));
        assert_eq!(three.speedup, Some(one.wall_time / three.wall_time));
        assert_eq!((one.error, one.f_evals), (three.error, three.f_evals));
    }
}

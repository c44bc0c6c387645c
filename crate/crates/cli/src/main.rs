use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rkpairs_cli::method::MethodSpec;
use rkpairs_cli::output::{analyze_row, csv_writer, integrate_row, RunContext, ANALYZE_HEADER, INTEGRATE_HEADER};
use rkpairs_cli::sweep::{run_sweep, write_bench_csv, ExecutorKind, SweepPlan};
use rkpairs_cli::{resolve_problem, CliError};
use rkpairs_core::analysis::analyze_method;
use rkpairs_core::exact::serialize_tableau;
use rkpairs_core::integrate::{integrate, ControllerConfig, ControllerMode, Executor, IntegrateOptions};

/// Build, analyse and run extrapolation and deferred-correction
/// Runge-Kutta pairs.
#[derive(Parser, Debug)]
#[command(name = "rkpairs", version)]
struct Cli {
    /// Directory searched for tableau files named by method selectors.
    #[arg(long, global = true, value_name = "DIR")]
    tableau_dir: Option<PathBuf>,
    /// Write CSV output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Seed for generated problems (`nbody:N` without its own seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel executor; bench takes a list.
    #[arg(long, global = true, value_delimiter = ',', value_name = "N")]
    workers: Vec<usize>,
    /// Directory for cached reference solutions.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DcOpts {
    /// Theta for dc methods, e.g. 0, 1/2 or 1.
    #[arg(long)]
    theta: Option<String>,
    /// Node family for dc methods: chebyshev or equispaced.
    #[arg(long)]
    nodes: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExecutorArg {
    Serial,
    Parallel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ControllerArg {
    I,
    Pi,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the tableau of one method.
    Build {
        /// `family order` (ex-euler 8, dc 4) or a selector such as dc:4:1/2.
        #[arg(required = true, num_args = 1..)]
        method: Vec<String>,
        #[command(flatten)]
        dc: DcOpts,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// One CSV row of parallel, stability and accuracy figures per method.
    Analyze {
        #[arg(required = true, num_args = 1..)]
        method: Vec<String>,
        #[command(flatten)]
        dc: DcOpts,
    },
    /// Integrate one problem and write a run record.
    Integrate {
        /// Family (with --order) or a full selector.
        #[arg(long)]
        method: String,
        #[arg(long)]
        order: Option<String>,
        #[command(flatten)]
        dc: DcOpts,
        /// sb1, b1, exp, cubic or nbody:N[:seed].
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        h0: f64,
        #[arg(long, value_enum, default_value_t = ExecutorArg::Serial)]
        executor: ExecutorArg,
        /// Constant step size instead of error control.
        #[arg(long, value_name = "H")]
        fixed_step: Option<f64>,
        #[arg(long, value_enum, default_value_t = ControllerArg::I)]
        controller: ControllerArg,
    },
    /// Work-precision sweep over a tolerance ladder.
    Bench {
        /// Comma-separated selectors, e.g. ex-euler:8,ex-midpoint:8,dc:8.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        #[arg(long, default_value = "sb1")]
        problem: String,
        /// Strictly decreasing; defaults to 1e-3 down to 1e-11 by decades.
        #[arg(long, value_delimiter = ',')]
        tols: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ExecutorArg::Serial)]
        executor: ExecutorArg,
        /// Timing repetitions; the median wall time is reported.
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1e-3)]
        h0: f64,
        #[arg(long, value_enum, default_value_t = ControllerArg::I)]
        controller: ControllerArg,
    },
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Usage(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn single_method(tokens: &[String], dc: &DcOpts) -> Result<MethodSpec, CliError> {
    let mut specs = MethodSpec::parse_tokens(tokens, dc.theta.as_deref(), dc.nodes.as_deref())?;
    if specs.len() != 1 {
        return Err(CliError::Usage("expected exactly one method".into()));
    }
    Ok(specs.remove(0))
}

fn mode(c: ControllerArg) -> ControllerMode {
    match c {
        ControllerArg::I => ControllerMode::I,
        ControllerArg::Pi => ControllerMode::Pi { beta1: None, beta2: None },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let dir = cli.tableau_dir.as_deref();
    match cli.command {
        Command::Build { method, dc, out } => {
            let m = single_method(&method, &dc)?.build(dir)?;
            let mut w = sink(out.as_deref())?;
            w.write_all(serialize_tableau(m.tableau()).as_bytes())?;
            w.flush()?;
        }
        Command::Analyze { method, dc } => {
            let specs = MethodSpec::parse_tokens(&method, dc.theta.as_deref(), dc.nodes.as_deref())?;
            let methods = specs.iter().map(|s| s.build(dir)).collect::<Result<Vec<_>, _>>()?;
            let mut w = csv_writer(sink(cli.csv.as_deref())?);
            w.write_record(ANALYZE_HEADER)?;
            for m in &methods {
                w.write_record(analyze_row(&analyze_method(m)))?;
            }
            w.flush()?;
        }
        Command::Integrate {
            method,
            order,
            dc,
            problem,
            tol,
            h0,
            executor,
            fixed_step,
            controller,
        } => {
            let tokens: Vec<String> = std::iter::once(method).chain(order).collect();
            let spec = single_method(&tokens, &dc)?;
            let m = spec.build(dir)?;
            let workers = match cli.workers.as_slice() {
                [] => 1,
                [w] if *w >= 1 => *w,
                _ => return Err(CliError::Usage("integrate takes a single worker count >= 1".into())),
            };
            let (exec, exec_name) = match executor {
                ExecutorArg::Serial => (Executor::Serial, "serial"),
                ExecutorArg::Parallel => (Executor::Parallel { workers }, "parallel"),
            };
            let problem = resolve_problem(&problem, cli.seed)?;
            let ivp = problem
                .with_reference(cli.cache_dir.as_deref())
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let opts = match fixed_step {
                Some(h) if h > 0.0 && h.is_finite() => IntegrateOptions::fixed(h),
                Some(h) => return Err(CliError::Usage(format!("fixed step must be positive, got {h}"))),
                None => {
                    let cfg = ControllerConfig::new(tol, h0).with_mode(mode(controller));
                    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                    IntegrateOptions::adaptive(cfg)
                }
            }
            .with_executor(exec)
            .without_trajectory();
            let label = spec.to_string();
            let ctx = RunContext {
                method: &label,
                problem: &problem.name,
                tol: fixed_step.is_none().then_some(tol),
                h0: fixed_step.is_none().then_some(h0),
                fixed_step,
                executor: exec_name,
                workers: if matches!(exec, Executor::Serial) { 1 } else { workers },
            };
            let out = integrate(&m, &ivp, &opts);
            let mut w = csv_writer(sink(cli.csv.as_deref())?);
            w.write_record(INTEGRATE_HEADER)?;
            match out {
                Ok((_, rec)) => {
                    w.write_record(integrate_row(&ctx, &rec, "ok"))?;
                    w.flush()?;
                }
                Err(fail) => {
                    w.write_record(integrate_row(&ctx, &fail.record, &fail.kind.to_string()))?;
                    w.flush()?;
                    return Err(CliError::Numerical(fail.to_string()));
                }
            }
        }
        Command::Bench {
            methods,
            problem,
            tols,
            executor,
            reps,
            h0,
            controller,
        } => {
            let specs = methods
                .iter()
                .map(|m| m.parse::<MethodSpec>())
                .collect::<Result<Vec<_>, _>>()?;
            let mut plan = SweepPlan::new(specs, &problem);
            if !tols.is_empty() {
                plan.tolerances = tols;
            }
            plan.executor = match executor {
                ExecutorArg::Serial => ExecutorKind::Serial,
                ExecutorArg::Parallel => ExecutorKind::Parallel,
            };
            if !cli.workers.is_empty() {
                plan.workers = cli.workers.clone();
            }
            plan.repetitions = reps;
            plan.h0 = h0;
            plan.pi = matches!(controller, ControllerArg::Pi);
            plan.seed = cli.seed;
            let rows = run_sweep(&plan, dir, cli.cache_dir.as_deref())?;
            write_bench_csv(sink(cli.csv.as_deref())?, &plan, &rows)?;
            let failed = rows.iter().filter(|r| r.failed()).count();
            let flagged = rows.iter().filter(|r| r.trend_violation).count();
            if failed + flagged > 0 {
                eprintln!("{failed} failed cell(s), {flagged} trend violation(s)");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rkpairs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

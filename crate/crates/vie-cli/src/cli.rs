//! Command-line front end: argument definitions and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vie_core::{builtin, LinearSolveConfig, Parareal, PararealConfig, Partition};

use crate::csvio::{write_csv, ErrorRecord};
use crate::experiment::{
    fit_coarse_decay, run_experiment, sequential_fine_floor, sequential_record, ExperimentSpec,
    Family,
};
use crate::plot::{experiment_chart, semilog_svg};
use crate::speedup::speedup_estimate;
use crate::sweep::parse_sweep;

pub const THREADS_ENV: &str = "VIE_PARAREAL_THREADS";

/// Failures split by exit status: usage problems exit 2, runtime failures 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "vie-parareal",
    version,
    about = "Spectral-collocation and parallel-in-time solvers for second-kind Volterra integral equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one problem and print a convergence table.
    Solve(SolveArgs),
    /// Run a sweep family and emit CSV (and optionally an SVG plot).
    Experiment(ExperimentArgs),
    /// Evaluate the cost model at one operating point.
    Speedup(SpeedupArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Parareal,
    SequentialFine,
    SequentialCoarse,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Problem name: sin-kernel, exp-kernel or poly-manufactured.
    #[arg(long = "problem")]
    pub problem: String,
    /// Horizon of the time interval [0, T].
    #[arg(long = "T")]
    pub horizon: f64,
    /// Number of subintervals.
    #[arg(long = "N")]
    pub subintervals: usize,
    /// Fine polynomial degree.
    #[arg(long = "M")]
    pub fine_degree: usize,
    /// Coarse polynomial degree (required unless mode is sequential-fine).
    #[arg(long = "Mc")]
    pub coarse_degree: Option<usize>,
    /// Iteration cap of the parareal run.
    #[arg(long = "iters", default_value_t = 25)]
    pub iters: usize,
    /// Early-stop tolerance on the iterate increment (0 disables).
    #[arg(long = "tol", default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long = "mode", value_enum, default_value_t = Mode::Parareal)]
    pub mode: Mode,
    /// Run the correction stage concurrently.
    #[arg(long = "parallel", action = clap::ArgAction::Set, default_value_t = true)]
    pub parallel: bool,
    /// CSV output path.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    /// SVG plot output path.
    #[arg(long = "plot")]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Sweep family: error-vs-M, error-vs-k, error-vs-Mc or single.
    #[arg(value_parser = Family::parse)]
    pub family: Family,
    #[arg(long = "problem")]
    pub problem: String,
    #[arg(long = "T")]
    pub horizon: f64,
    #[arg(long = "N")]
    pub subintervals: usize,
    /// Fine degree sweep: `25`, `14,16,18` or `14:26:2`.
    #[arg(long = "M")]
    pub fine_degrees: String,
    /// Coarse degree sweep.
    #[arg(long = "Mc")]
    pub coarse_degrees: String,
    /// Iteration sweep (cap for error-vs-M/error-vs-k, list for error-vs-Mc).
    #[arg(long = "iters")]
    pub iterations: String,
    /// Early-stop tolerance for converged-run families (0 disables).
    #[arg(long = "tol", default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long = "parallel", action = clap::ArgAction::Set, default_value_t = true)]
    pub parallel: bool,
    /// CSV output path; stdout when omitted.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    /// SVG plot output path.
    #[arg(long = "plot")]
    pub plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpeedupArgs {
    #[arg(long = "N")]
    pub subintervals: usize,
    #[arg(long = "M")]
    pub fine_degree: usize,
    #[arg(long = "Mc")]
    pub coarse_degree: usize,
    #[arg(long = "K")]
    pub iterations: usize,
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Experiment(args) => experiment(args),
        Command::Speedup(args) => speedup(args),
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(text) => {
            let n: usize = text.trim().parse().map_err(|_| {
                CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got `{text}`"))
            })?;
            Ok(if n == 0 { None } else { Some(n) })
        }
        Err(_) => Ok(None),
    }
}

fn write_outputs(
    family: Family,
    records: &[ErrorRecord],
    out: Option<&PathBuf>,
    plot: Option<&PathBuf>,
    stdout_fallback: bool,
) -> Result<(), CliError> {
    let csv = write_csv(records);
    match out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?,
        None if stdout_fallback => print!("{csv}"),
        None => {}
    }
    if let Some(path) = plot {
        let (title, x_label, series) = experiment_chart(family, records);
        let svg = semilog_svg(&title, &x_label, "L\u{221e} error", &series);
        std::fs::write(path, svg)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let max_threads = threads_from_env()?;
    let spec = ExperimentSpec {
        family: Family::Single,
        problem: args.problem.clone(),
        horizon: args.horizon,
        subintervals: args.subintervals,
        fine_degrees: vec![args.fine_degree],
        coarse_degrees: vec![args.coarse_degree.unwrap_or(1)],
        iterations: vec![args.iters],
        stop_tol: args.tol,
        parallel: args.parallel,
        max_threads,
    };

    match args.mode {
        Mode::SequentialFine => {
            sequential_mode(&spec, "sequential-fine", args.fine_degree, &args)
        }
        Mode::SequentialCoarse => {
            let coarse = args.coarse_degree.ok_or_else(|| {
                CliError::Usage("--Mc is required for mode sequential-coarse".into())
            })?;
            sequential_mode(&spec, "sequential-coarse", coarse, &args)
        }
        Mode::Parareal => {
            let coarse = args.coarse_degree.ok_or_else(|| {
                CliError::Usage("--Mc is required for mode parareal".into())
            })?;
            parareal_mode(&spec, coarse, &args)
        }
    }
}

fn sequential_mode(
    spec: &ExperimentSpec,
    label: &str,
    degree: usize,
    args: &SolveArgs,
) -> Result<(), CliError> {
    let mut spec = spec.clone();
    spec.fine_degrees = vec![degree.max(2)];
    spec.coarse_degrees = vec![1];
    spec.iterations = vec![1];
    spec.validate().map_err(CliError::Usage)?;
    let record = sequential_record(&spec, label, degree).map_err(CliError::Runtime)?;
    println!(
        "problem {}  T={}  N={}  degree={}  mode={label}",
        spec.problem, spec.horizon, spec.subintervals, degree
    );
    println!("final linf error: {:.6e}", record.linf_error);
    println!("gauss-seidel sweeps: {}", record.fine_sweeps);
    println!("wall: {:.3} ms", record.wall_ms);
    write_outputs(
        Family::Single,
        std::slice::from_ref(&record),
        args.out.as_ref(),
        args.plot.as_ref(),
        false,
    )
}

fn parareal_mode(spec: &ExperimentSpec, coarse: usize, args: &SolveArgs) -> Result<(), CliError> {
    let mut spec = spec.clone();
    spec.coarse_degrees = vec![coarse];
    spec.validate().map_err(CliError::Usage)?;
    let problem = builtin(&spec.problem, spec.horizon)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let partition = Partition::uniform(spec.subintervals, spec.horizon)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let config = PararealConfig {
        fine_degree: args.fine_degree,
        coarse_degree: coarse,
        max_iters: args.iters,
        stop_tol: args.tol,
        linear: LinearSolveConfig::default(),
        parallel: args.parallel,
        max_threads: spec.max_threads,
    };
    let driver = Parareal::new(&problem, partition, config)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (_, report) = driver.run().map_err(|e| CliError::Runtime(e.to_string()))?;

    println!(
        "problem {}  T={}  N={}  M={}  Mc={}  mode=parareal  parallel={}",
        spec.problem, spec.horizon, spec.subintervals, args.fine_degree, coarse, args.parallel
    );
    println!("iter    increment       linf_error      fine_sweeps  coarse_sweeps  wall_ms");
    println!(
        "init    {:>14}  {:>14}  {:>11}  {:>13}  {:>8.2}",
        "-",
        report
            .init_error
            .map_or("-".to_string(), |e| format!("{e:.6e}")),
        0,
        report.init_sweeps,
        report.init_ms
    );
    for (idx, stats) in report.iterations.iter().enumerate() {
        println!(
            "{:>4}    {:>14.6e}  {:>14}  {:>11}  {:>13}  {:>8.2}",
            idx + 1,
            stats.increment,
            stats
                .linf_error
                .map_or("-".to_string(), |e| format!("{e:.6e}")),
            stats.fine_sweeps,
            stats.coarse_sweeps,
            stats.fine_ms + stats.coarse_ms
        );
    }
    println!(
        "converged: {} after {} iterations (tol {:.1e})",
        report.converged,
        report.iterations_run(),
        args.tol
    );
    if let Some(err) = report.final_error() {
        println!("final linf error: {err:.6e}");
    }
    let fine_total: u64 = report.iterations.iter().map(|s| s.fine_sweeps).sum();
    let coarse_total: u64 =
        report.init_sweeps + report.iterations.iter().map(|s| s.coarse_sweeps).sum::<u64>();
    println!("cumulative sweeps: fine {fine_total}, coarse {coarse_total}");
    if coarse < args.fine_degree {
        let k = report.iterations_run().max(1);
        let est = speedup_estimate(spec.subintervals, args.fine_degree, coarse, k);
        println!(
            "cost model at K={k}: sequential {:.0}, parareal {:.0}, speedup {:.3}, asymptotic bound {:.4}",
            est.sequential_cost, est.parareal_cost, est.speedup, est.asymptotic_bound
        );
    }

    let records = crate::experiment::run_to_records(&spec, &report);
    write_outputs(
        Family::Single,
        &records,
        args.out.as_ref(),
        args.plot.as_ref(),
        false,
    )
}

fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let max_threads = threads_from_env()?;
    let spec = ExperimentSpec {
        family: args.family,
        problem: args.problem,
        horizon: args.horizon,
        subintervals: args.subintervals,
        fine_degrees: parse_sweep(&args.fine_degrees).map_err(CliError::Usage)?,
        coarse_degrees: parse_sweep(&args.coarse_degrees).map_err(CliError::Usage)?,
        iterations: parse_sweep(&args.iterations).map_err(CliError::Usage)?,
        stop_tol: args.tol,
        parallel: args.parallel,
        max_threads,
    };
    spec.validate().map_err(CliError::Usage)?;
    let records = run_experiment(&spec).map_err(CliError::Runtime)?;

    if args.family == Family::ErrorVsMc {
        let floor = sequential_fine_floor(&spec).map_err(CliError::Runtime)?;
        eprintln!("fine floor at M={}: {floor:.6e}", spec.fine_degrees[0]);
        for fit in fit_coarse_decay(&records, floor) {
            eprintln!(
                "k={}: slope {:.4} decades per unit Mc over {} points, rate constant c={:.4}",
                fit.iterations, fit.slope, fit.points_used, fit.rate_constant
            );
        }
    }
    write_outputs(args.family, &records, args.out.as_ref(), args.plot.as_ref(), true)
}

fn speedup(args: SpeedupArgs) -> Result<(), CliError> {
    if args.subintervals == 0 || args.fine_degree == 0 || args.coarse_degree == 0 || args.iterations == 0
    {
        return Err(CliError::Usage("all speedup parameters must be positive".into()));
    }
    if args.coarse_degree >= args.fine_degree {
        return Err(CliError::Usage(format!(
            "Mc ({}) must be strictly below M ({})",
            args.coarse_degree, args.fine_degree
        )));
    }
    let est = speedup_estimate(
        args.subintervals,
        args.fine_degree,
        args.coarse_degree,
        args.iterations,
    );
    println!(
        "cost model (N={}, M={}, Mc={}, K={})",
        est.subintervals, est.fine_degree, est.coarse_degree, est.iterations
    );
    println!("sequential fine cost: {:.0} model units", est.sequential_cost);
    println!("parareal cost:        {:.0} model units", est.parareal_cost);
    println!("speedup (model units): {:.4}", est.speedup);
    println!("asymptotic speedup bound: {:.4}", est.asymptotic_bound);
    Ok(())
}

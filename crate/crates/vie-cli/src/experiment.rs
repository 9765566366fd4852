//! Experiment families over the benchmark problems.
//!
//! Three sweep families mirror the convergence studies: error against the
//! fine degree at a fixed coarse degree, error against the iteration count
//! for several coarse degrees, and error against the coarse degree at fixed
//! iteration counts. Runs inside one experiment share a quadrature-rule
//! cache and a single partition, and the per-row wall-clock column is the
//! only non-deterministic output.

use std::collections::HashMap;
use std::time::Instant;

use vie_core::{
    builtin, sequential_solve_with, LinearSolveConfig, Parareal, PararealConfig, Partition,
    QuadratureRule, RunReport, VolterraProblem,
};

use crate::csvio::ErrorRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ErrorVsM,
    ErrorVsK,
    ErrorVsMc,
    Single,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::ErrorVsM => "error-vs-M",
            Family::ErrorVsK => "error-vs-k",
            Family::ErrorVsMc => "error-vs-Mc",
            Family::Single => "single",
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        match text.to_ascii_lowercase().as_str() {
            "error-vs-m" => Ok(Family::ErrorVsM),
            "error-vs-k" => Ok(Family::ErrorVsK),
            "error-vs-mc" => Ok(Family::ErrorVsMc),
            "single" => Ok(Family::Single),
            other => Err(format!(
                "unknown experiment family `{other}` (expected error-vs-M, error-vs-k, error-vs-Mc or single)"
            )),
        }
    }
}

/// Fully resolved description of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub family: Family,
    pub problem: String,
    pub horizon: f64,
    pub subintervals: usize,
    pub fine_degrees: Vec<usize>,
    pub coarse_degrees: Vec<usize>,
    pub iterations: Vec<usize>,
    /// Increment tolerance for families that iterate to convergence.
    pub stop_tol: f64,
    pub parallel: bool,
    pub max_threads: Option<usize>,
}

impl ExperimentSpec {
    /// Checks every structural invariant before any computation starts.
    pub fn validate(&self) -> Result<(), String> {
        crate::sweep::validate_sweep("M", &self.fine_degrees)?;
        crate::sweep::validate_sweep("Mc", &self.coarse_degrees)?;
        crate::sweep::validate_sweep("iters", &self.iterations)?;
        if !vie_core::builtin_names().contains(&self.problem.as_str()) {
            return Err(format!(
                "unknown problem `{}` (expected one of {})",
                self.problem,
                vie_core::builtin_names().join(", ")
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(format!("T must be positive and finite, got {}", self.horizon));
        }
        if self.subintervals == 0 {
            return Err("N must be at least 1".into());
        }
        if self.stop_tol < 0.0 || !self.stop_tol.is_finite() {
            return Err(format!("tol must be finite and non-negative, got {}", self.stop_tol));
        }
        let max_coarse = *self.coarse_degrees.last().unwrap();
        let min_fine = *self.fine_degrees.first().unwrap();
        if max_coarse >= min_fine {
            return Err(format!(
                "coarse degrees must stay strictly below fine degrees (Mc {max_coarse} vs M {min_fine})"
            ));
        }
        let single = |name: &str, values: &[usize]| -> Result<(), String> {
            if values.len() != 1 {
                return Err(format!(
                    "family {} takes a single {name} value, got {}",
                    self.family.as_str(),
                    values.len()
                ));
            }
            Ok(())
        };
        match self.family {
            Family::ErrorVsM => {
                single("Mc", &self.coarse_degrees)?;
                single("iters", &self.iterations)?;
            }
            Family::ErrorVsK => {
                single("M", &self.fine_degrees)?;
                single("iters", &self.iterations)?;
                if self.iterations[0] == 0 {
                    return Err("error-vs-k needs at least one iteration".into());
                }
            }
            Family::ErrorVsMc => {
                single("M", &self.fine_degrees)?;
                if self.iterations[0] == 0 {
                    return Err("error-vs-Mc iteration counts must be at least 1".into());
                }
            }
            Family::Single => {
                single("M", &self.fine_degrees)?;
                single("Mc", &self.coarse_degrees)?;
                single("iters", &self.iterations)?;
            }
        }
        Ok(())
    }
}

/// Quadrature rules shared across the sweep points of one experiment.
#[derive(Default)]
pub struct RuleCache {
    rules: HashMap<usize, QuadratureRule>,
}

impl RuleCache {
    pub fn get(&mut self, degree: usize) -> Result<QuadratureRule, String> {
        if let Some(rule) = self.rules.get(&degree) {
            return Ok(rule.clone());
        }
        let rule = QuadratureRule::gauss_legendre(degree).map_err(|e| e.to_string())?;
        self.rules.insert(degree, rule.clone());
        Ok(rule.clone())
    }
}

fn resolve_problem(spec: &ExperimentSpec) -> Result<VolterraProblem, String> {
    let problem = builtin(&spec.problem, spec.horizon).map_err(|e| e.to_string())?;
    if !problem.has_exact() {
        return Err(format!(
            "problem `{}` has no exact solution to measure errors against",
            spec.problem
        ));
    }
    Ok(problem)
}

fn parareal_driver<'p>(
    problem: &'p VolterraProblem,
    partition: &Partition,
    spec: &ExperimentSpec,
    cache: &mut RuleCache,
    fine: usize,
    coarse: usize,
    max_iters: usize,
    stop_tol: f64,
) -> Result<Parareal<'p>, String> {
    let config = PararealConfig {
        fine_degree: fine,
        coarse_degree: coarse,
        max_iters,
        stop_tol,
        linear: LinearSolveConfig::default(),
        parallel: spec.parallel,
        max_threads: spec.max_threads,
    };
    Parareal::with_rules(
        problem,
        partition.clone(),
        config,
        cache.get(fine)?,
        cache.get(coarse)?,
    )
    .map_err(|e| e.to_string())
}

fn total_fine_sweeps(report: &RunReport) -> u64 {
    report.iterations.iter().map(|s| s.fine_sweeps).sum()
}

fn total_coarse_sweeps(report: &RunReport) -> u64 {
    report.init_sweeps + report.iterations.iter().map(|s| s.coarse_sweeps).sum::<u64>()
}

fn total_wall_ms(report: &RunReport) -> f64 {
    report.init_ms
        + report
            .iterations
            .iter()
            .map(|s| s.fine_ms + s.coarse_ms)
            .sum::<f64>()
}

fn summary_record(
    spec: &ExperimentSpec,
    fine: usize,
    coarse: usize,
    report: &RunReport,
) -> ErrorRecord {
    ErrorRecord {
        experiment: spec.family.as_str().to_string(),
        problem: spec.problem.clone(),
        horizon: spec.horizon,
        subintervals: spec.subintervals,
        fine_degree: fine,
        coarse_degree: coarse,
        iteration: report.iterations_run(),
        linf_error: report.final_error().unwrap_or(f64::INFINITY),
        increment: report.iterations.last().map_or(0.0, |s| s.increment),
        wall_ms: total_wall_ms(report),
        fine_sweeps: total_fine_sweeps(report),
        coarse_sweeps: total_coarse_sweeps(report),
    }
}

fn per_iteration_records(
    spec: &ExperimentSpec,
    fine: usize,
    coarse: usize,
    report: &RunReport,
    include_init: bool,
) -> Vec<ErrorRecord> {
    let mut rows = Vec::with_capacity(report.iterations_run() + 1);
    if include_init {
        rows.push(ErrorRecord {
            experiment: spec.family.as_str().to_string(),
            problem: spec.problem.clone(),
            horizon: spec.horizon,
            subintervals: spec.subintervals,
            fine_degree: fine,
            coarse_degree: coarse,
            iteration: 0,
            linf_error: report.init_error.unwrap_or(f64::INFINITY),
            increment: 0.0,
            wall_ms: report.init_ms,
            fine_sweeps: 0,
            coarse_sweeps: report.init_sweeps,
        });
    }
    for (idx, stats) in report.iterations.iter().enumerate() {
        rows.push(ErrorRecord {
            experiment: spec.family.as_str().to_string(),
            problem: spec.problem.clone(),
            horizon: spec.horizon,
            subintervals: spec.subintervals,
            fine_degree: fine,
            coarse_degree: coarse,
            iteration: idx + 1,
            linf_error: stats.linf_error.unwrap_or(f64::INFINITY),
            increment: stats.increment,
            wall_ms: stats.fine_ms + stats.coarse_ms,
            fine_sweeps: stats.fine_sweeps,
            coarse_sweeps: stats.coarse_sweeps,
        });
    }
    rows
}

/// Converts a finished run into per-iteration records, initialization row
/// included; used by the solve subcommand's CSV output.
pub fn run_to_records(spec: &ExperimentSpec, report: &RunReport) -> Vec<ErrorRecord> {
    per_iteration_records(
        spec,
        spec.fine_degrees[0],
        spec.coarse_degrees[0],
        report,
        true,
    )
}

/// Runs an experiment and returns one record per sweep point.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ErrorRecord>, String> {
    spec.validate()?;
    let problem = resolve_problem(spec)?;
    let partition =
        Partition::uniform(spec.subintervals, spec.horizon).map_err(|e| e.to_string())?;
    let mut cache = RuleCache::default();
    let mut records = Vec::new();

    match spec.family {
        Family::ErrorVsM => {
            let coarse = spec.coarse_degrees[0];
            let cap = spec.iterations[0];
            for &fine in &spec.fine_degrees {
                let driver = parareal_driver(
                    &problem, &partition, spec, &mut cache, fine, coarse, cap, spec.stop_tol,
                )?;
                let (_, report) = driver.run().map_err(|e| e.to_string())?;
                records.push(summary_record(spec, fine, coarse, &report));
            }
        }
        Family::ErrorVsK => {
            let fine = spec.fine_degrees[0];
            let cap = spec.iterations[0];
            for &coarse in &spec.coarse_degrees {
                let driver = parareal_driver(
                    &problem, &partition, spec, &mut cache, fine, coarse, cap, 0.0,
                )?;
                let (_, report) = driver.run().map_err(|e| e.to_string())?;
                records.extend(per_iteration_records(spec, fine, coarse, &report, false));
            }
        }
        Family::ErrorVsMc => {
            let fine = spec.fine_degrees[0];
            let cap = *spec.iterations.last().unwrap();
            let mut by_coarse: HashMap<usize, Vec<ErrorRecord>> = HashMap::new();
            for &coarse in &spec.coarse_degrees {
                let driver = parareal_driver(
                    &problem, &partition, spec, &mut cache, fine, coarse, cap, 0.0,
                )?;
                let (_, report) = driver.run().map_err(|e| e.to_string())?;
                by_coarse.insert(
                    coarse,
                    per_iteration_records(spec, fine, coarse, &report, false),
                );
            }
            for &k in &spec.iterations {
                for &coarse in &spec.coarse_degrees {
                    records.push(by_coarse[&coarse][k - 1].clone());
                }
            }
        }
        Family::Single => {
            let fine = spec.fine_degrees[0];
            let coarse = spec.coarse_degrees[0];
            let cap = spec.iterations[0];
            let driver = parareal_driver(
                &problem, &partition, spec, &mut cache, fine, coarse, cap, spec.stop_tol,
            )?;
            let (_, report) = driver.run().map_err(|e| e.to_string())?;
            records.extend(per_iteration_records(spec, fine, coarse, &report, true));
        }
    }
    Ok(records)
}

/// Probe-grid error of the sequential fine solver; the floor that slope fits
/// measure against.
pub fn sequential_fine_floor(spec: &ExperimentSpec) -> Result<f64, String> {
    let problem = resolve_problem(spec)?;
    let partition =
        Partition::uniform(spec.subintervals, spec.horizon).map_err(|e| e.to_string())?;
    let rule = QuadratureRule::gauss_legendre(spec.fine_degrees[0]).map_err(|e| e.to_string())?;
    let (solution, _) =
        sequential_solve_with(&problem, &partition, &rule, &LinearSolveConfig::default())
            .map_err(|e| e.to_string())?;
    let exact = problem.exact().unwrap().clone();
    Ok(solution.linf_error(|t| exact(t)))
}

/// Sequential-solve timing and error, for the solve subcommand's
/// `sequential-fine` / `sequential-coarse` modes.
pub fn sequential_record(
    spec: &ExperimentSpec,
    mode_label: &str,
    degree: usize,
) -> Result<ErrorRecord, String> {
    let problem = resolve_problem(spec)?;
    let partition =
        Partition::uniform(spec.subintervals, spec.horizon).map_err(|e| e.to_string())?;
    let rule = QuadratureRule::gauss_legendre(degree).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (solution, sweeps) =
        sequential_solve_with(&problem, &partition, &rule, &LinearSolveConfig::default())
            .map_err(|e| e.to_string())?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let exact = problem.exact().unwrap().clone();
    Ok(ErrorRecord {
        experiment: mode_label.to_string(),
        problem: spec.problem.clone(),
        horizon: spec.horizon,
        subintervals: spec.subintervals,
        fine_degree: degree,
        coarse_degree: 0,
        iteration: 0,
        linf_error: solution.linf_error(|t| exact(t)),
        increment: 0.0,
        wall_ms,
        fine_sweeps: sweeps,
        coarse_sweeps: 0,
    })
}

/// Least-squares slope of `log10(error)` against the coarse degree for one
/// iteration count, restricted to points above `100 x` the fine floor.
#[derive(Debug, Clone)]
pub struct SlopeFit {
    pub iterations: usize,
    /// Decades of error per unit of coarse degree (negative when decaying).
    pub slope: f64,
    /// Decay-rate constant of the model `error ~ exp(-c Mc (k+1))`,
    /// extracted as `|slope| ln(10) / (k+1)`.
    pub rate_constant: f64,
    pub points_used: usize,
}

/// Fits the error-vs-Mc records family-wide, one fit per iteration count.
/// Groups with fewer than two usable points are skipped.
pub fn fit_coarse_decay(records: &[ErrorRecord], fine_floor: f64) -> Vec<SlopeFit> {
    let threshold = 100.0 * fine_floor;
    let mut ks: Vec<usize> = records.iter().map(|r| r.iteration).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut fits = Vec::new();
    for k in ks {
        let points: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.iteration == k && r.linf_error >= threshold && r.linf_error.is_finite())
            .map(|r| (r.coarse_degree as f64, r.linf_error.log10()))
            .collect();
        if points.len() < 2 {
            continue;
        }
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let rate_constant = slope.abs() * std::f64::consts::LN_10 / (k as f64 + 1.0);
        fits.push(SlopeFit {
            iterations: k,
            slope,
            rate_constant,
            points_used: points.len(),
        });
    }
    fits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec(family: Family) -> ExperimentSpec {
        ExperimentSpec {
            family,
            problem: "poly-manufactured".into(),
            horizon: 1.0,
            subintervals: 4,
            fine_degrees: vec![5],
            coarse_degrees: vec![2],
            iterations: vec![3],
            stop_tol: 0.0,
            parallel: false,
            max_threads: None,
        }
    }

    #[test]
    fn family_names_round_trip() {
        for family in [Family::ErrorVsM, Family::ErrorVsK, Family::ErrorVsMc, Family::Single] {
            assert_eq!(Family::parse(family.as_str()).unwrap(), family);
        }
        assert_eq!(Family::parse("ERROR-VS-MC").unwrap(), Family::ErrorVsMc);
        assert!(Family::parse("error-vs-q").is_err());
    }

    #[test]
    fn validation_rejects_coarse_at_or_above_fine() {
        let mut spec = base_spec(Family::Single);
        spec.coarse_degrees = vec![5];
        assert!(spec.validate().is_err());
        spec.coarse_degrees = vec![6];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn validation_rejects_unknown_problem_and_bad_horizon() {
        let mut spec = base_spec(Family::Single);
        spec.problem = "mystery".into();
        assert!(spec.validate().is_err());
        let mut spec = base_spec(Family::Single);
        spec.horizon = -2.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn validation_enforces_family_arity() {
        let mut spec = base_spec(Family::ErrorVsM);
        spec.fine_degrees = vec![4, 5, 6];
        spec.coarse_degrees = vec![2, 3];
        assert!(spec.validate().is_err());
        spec.coarse_degrees = vec![2];
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn error_vs_k_row_count_is_iters_times_coarse_list() {
        let mut spec = base_spec(Family::ErrorVsK);
        spec.coarse_degrees = vec![2, 3];
        spec.iterations = vec![3];
        let records = run_experiment(&spec).unwrap();
        assert_eq!(records.len(), 6);
        let ks: Vec<usize> = records.iter().map(|r| r.iteration).collect();
        assert_eq!(ks, vec![1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn error_vs_m_emits_one_row_per_degree() {
        let mut spec = base_spec(Family::ErrorVsM);
        spec.fine_degrees = vec![3, 4, 5];
        let records = run_experiment(&spec).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.linf_error <= 1e-10, "poly run should be exact, got {:e}", r.linf_error);
        }
    }

    #[test]
    fn error_vs_mc_orders_rows_by_iteration_then_degree() {
        let mut spec = base_spec(Family::ErrorVsMc);
        spec.fine_degrees = vec![6];
        spec.coarse_degrees = vec![2, 3];
        spec.iterations = vec![1, 2];
        let records = run_experiment(&spec).unwrap();
        let shape: Vec<(usize, usize)> = records
            .iter()
            .map(|r| (r.iteration, r.coarse_degree))
            .collect();
        assert_eq!(shape, vec![(1, 2), (1, 3), (2, 2), (2, 3)]);
    }

    #[test]
    fn single_family_includes_the_initialization_row() {
        let spec = base_spec(Family::Single);
        let records = run_experiment(&spec).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records[0].iteration, 0);
        assert_eq!(records[0].fine_sweeps, 0);
    }

    #[test]
    fn determinism_modulo_wall_clock() {
        let mut spec = base_spec(Family::ErrorVsK);
        spec.problem = "sin-kernel".into();
        spec.horizon = 8.0;
        spec.subintervals = 4;
        spec.fine_degrees = vec![10];
        spec.coarse_degrees = vec![3, 5];
        spec.iterations = vec![3];
        spec.parallel = true;
        let mut a = run_experiment(&spec).unwrap();
        let mut b = run_experiment(&spec).unwrap();
        for r in a.iter_mut().chain(b.iter_mut()) {
            r.wall_ms = 0.0;
        }
        assert_eq!(a, b);
    }

    #[test]
    fn slope_fit_recovers_a_synthetic_decay() {
        // error = 10^{-(0.5 (k+1) Mc + 1)} exactly.
        let mut records = Vec::new();
        for k in [2usize, 3] {
            for mc in [4usize, 6, 8] {
                let mut r = ErrorRecord {
                    experiment: "error-vs-Mc".into(),
                    problem: "sin-kernel".into(),
                    horizon: 1.0,
                    subintervals: 1,
                    fine_degree: 25,
                    coarse_degree: mc,
                    iteration: k,
                    linf_error: 0.0,
                    increment: 0.0,
                    wall_ms: 0.0,
                    fine_sweeps: 0,
                    coarse_sweeps: 0,
                };
                r.linf_error = 10f64.powf(-(0.5 * (k as f64 + 1.0) * mc as f64 + 1.0));
                records.push(r);
            }
        }
        let fits = fit_coarse_decay(&records, 1e-30);
        assert_eq!(fits.len(), 2);
        for fit in fits {
            let expected_slope = -0.5 * (fit.iterations as f64 + 1.0);
            assert!((fit.slope - expected_slope).abs() <= 1e-9);
            let expected_c = 0.5 * std::f64::consts::LN_10;
            assert!((fit.rate_constant - expected_c).abs() <= 1e-9);
            assert_eq!(fit.points_used, 3);
        }
    }

    #[test]
    fn slope_fit_drops_floor_contaminated_points() {
        let mut records = Vec::new();
        for (mc, err) in [(2usize, 1e-2), (4, 1e-4), (6, 5e-11)] {
            records.push(ErrorRecord {
                experiment: "error-vs-Mc".into(),
                problem: "sin-kernel".into(),
                horizon: 1.0,
                subintervals: 1,
                fine_degree: 25,
                coarse_degree: mc,
                iteration: 2,
                linf_error: err,
                increment: 0.0,
                wall_ms: 0.0,
                fine_sweeps: 0,
                coarse_sweeps: 0,
            });
        }
        let fits = fit_coarse_decay(&records, 1e-11);
        assert_eq!(fits[0].points_used, 2);
    }
}

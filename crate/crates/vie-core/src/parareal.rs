//! Parallel-in-time iteration over the block collocation solvers.
//!
//! One iteration couples two propagators over the partition: a fine
//! collocation solve of degree `M` and a cheap coarse solve of degree
//! `Mc < M`. The corrections `F_n(U^{k-1}) - G_n(U^{k-1})` are independent
//! across blocks and run concurrently; the coarse prediction `G_n(U^k)` then
//! sweeps the blocks sequentially and the new iterate is the prediction plus
//! the frozen correction. The iterate always lives on the fine grid; coarse
//! solves see restricted history and their outputs are prolonged back before
//! the update. The coarse values of the current sweep are cached so the next
//! iteration's corrections reuse them instead of re-solving.

use std::time::Instant;

use rayon::prelude::*;

use crate::collocation::{history_rhs, NodalSolution, Partition};
use crate::error::{Error, Result};
use crate::linear::{solve, DenseMatrix, LinearSolveConfig};
use crate::problem::VolterraProblem;
use crate::quadrature::{barycentric_eval, QuadratureRule};

/// Settings of one parareal run.
#[derive(Debug, Clone)]
pub struct PararealConfig {
    /// Degree of the fine propagator.
    pub fine_degree: usize,
    /// Degree of the coarse propagator. Must not exceed the fine degree;
    /// equality is degenerate (the corrector vanishes) but accepted.
    pub coarse_degree: usize,
    /// Iteration cap.
    pub max_iters: usize,
    /// Early-stop threshold on the max-norm increment between iterates over
    /// the fine nodes; `0` disables early stopping.
    pub stop_tol: f64,
    pub linear: LinearSolveConfig,
    /// Run the correction stage concurrently across blocks.
    pub parallel: bool,
    /// Thread cap for the correction stage; `None` or `Some(0)` uses the
    /// default pool.
    pub max_threads: Option<usize>,
}

impl PararealConfig {
    pub fn new(fine_degree: usize, coarse_degree: usize) -> Self {
        Self {
            fine_degree,
            coarse_degree,
            max_iters: 25,
            stop_tol: 1e-12,
            linear: LinearSolveConfig::default(),
            parallel: true,
            max_threads: None,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_stop_tol(mut self, stop_tol: f64) -> Self {
        self.stop_tol = stop_tol;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.coarse_degree < 1 {
            return Err(Error::InvalidConfig(
                "coarse degree must be at least 1".into(),
            ));
        }
        if self.coarse_degree > self.fine_degree {
            return Err(Error::InvalidConfig(format!(
                "coarse degree {} exceeds fine degree {}",
                self.coarse_degree, self.fine_degree
            )));
        }
        if self.stop_tol < 0.0 || !self.stop_tol.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "stop tolerance must be finite and non-negative, got {}",
                self.stop_tol
            )));
        }
        Ok(())
    }
}

/// Mutable state of the iteration.
#[derive(Debug, Clone)]
pub struct PararealState {
    /// Completed iteration count.
    pub k: usize,
    /// Current iterate on the fine grid.
    pub current: NodalSolution,
    /// Coarse predictions of the latest sweep, prolonged to the fine nodes;
    /// consumed as `G_n(U^{k-1})` by the next iteration's corrections.
    coarse_prev: Vec<Vec<f64>>,
    /// History of max-norm increments, one entry per iteration.
    pub increments: Vec<f64>,
    /// Cumulative Gauss-Seidel sweeps of the fine solves.
    pub fine_sweeps: u64,
    /// Cumulative Gauss-Seidel sweeps of the coarse solves.
    pub coarse_sweeps: u64,
}

/// Per-iteration record kept by [`RunReport`].
#[derive(Debug, Clone)]
pub struct IterationStats {
    pub increment: f64,
    /// Probe-grid error against the exact solution, when one is registered.
    pub linf_error: Option<f64>,
    pub fine_ms: f64,
    pub coarse_ms: f64,
    pub fine_sweeps: u64,
    pub coarse_sweeps: u64,
}

/// Outcome summary of [`Parareal::run`].
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub init_ms: f64,
    pub init_sweeps: u64,
    pub init_error: Option<f64>,
    pub iterations: Vec<IterationStats>,
    /// Whether the increment dropped below the stop tolerance.
    pub converged: bool,
}

impl RunReport {
    pub fn iterations_run(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.iterations
            .last()
            .map_or(self.init_error, |s| s.linf_error)
    }
}

/// Driver owning the assembled block matrices and node caches of one
/// (problem, partition, config) triple.
pub struct Parareal<'p> {
    problem: &'p VolterraProblem,
    partition: Partition,
    config: PararealConfig,
    fine_rule: QuadratureRule,
    coarse_rule: QuadratureRule,
    fine_nodes: Vec<Vec<f64>>,
    coarse_nodes: Vec<Vec<f64>>,
    fine_matrices: Vec<DenseMatrix>,
    coarse_matrices: Vec<DenseMatrix>,
    pool: Option<rayon::ThreadPool>,
}

impl<'p> Parareal<'p> {
    pub fn new(
        problem: &'p VolterraProblem,
        partition: Partition,
        config: PararealConfig,
    ) -> Result<Self> {
        let fine_rule = QuadratureRule::gauss_legendre(config.fine_degree)?;
        let coarse_rule = QuadratureRule::gauss_legendre(config.coarse_degree)?;
        Self::with_rules(problem, partition, config, fine_rule, coarse_rule)
    }

    /// Variant taking prebuilt rules so sweeping callers can share a cache.
    pub fn with_rules(
        problem: &'p VolterraProblem,
        partition: Partition,
        config: PararealConfig,
        fine_rule: QuadratureRule,
        coarse_rule: QuadratureRule,
    ) -> Result<Self> {
        config.validate()?;
        if fine_rule.degree() != config.fine_degree {
            return Err(Error::DimensionMismatch {
                expected: config.fine_degree,
                got: fine_rule.degree(),
            });
        }
        if coarse_rule.degree() != config.coarse_degree {
            return Err(Error::DimensionMismatch {
                expected: config.coarse_degree,
                got: coarse_rule.degree(),
            });
        }
        let count = partition.count();
        let fine_nodes: Vec<Vec<f64>> = (0..count)
            .map(|n| partition.mapped_nodes(n, &fine_rule))
            .collect();
        let coarse_nodes: Vec<Vec<f64>> = (0..count)
            .map(|n| partition.mapped_nodes(n, &coarse_rule))
            .collect();
        let fine_matrices = (0..count)
            .map(|n| crate::collocation::assemble_matrix(problem, &partition, n, &fine_rule))
            .collect::<Result<Vec<_>>>()?;
        let coarse_matrices = (0..count)
            .map(|n| crate::collocation::assemble_matrix(problem, &partition, n, &coarse_rule))
            .collect::<Result<Vec<_>>>()?;
        let pool = match (config.parallel, config.max_threads) {
            (true, Some(threads)) if threads > 0 => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
            ),
            _ => None,
        };
        Ok(Self {
            problem,
            partition,
            config,
            fine_rule,
            coarse_rule,
            fine_nodes,
            coarse_nodes,
            fine_matrices,
            coarse_matrices,
            pool,
        })
    }

    pub fn config(&self) -> &PararealConfig {
        &self.config
    }

    pub fn fine_rule(&self) -> &QuadratureRule {
        &self.fine_rule
    }

    pub fn coarse_rule(&self) -> &QuadratureRule {
        &self.coarse_rule
    }

    fn prolong(&self, n: usize, coarse_block: &[f64]) -> Vec<f64> {
        if self.config.coarse_degree == self.config.fine_degree {
            return coarse_block.to_vec();
        }
        self.fine_nodes[n]
            .iter()
            .map(|&t| {
                barycentric_eval(
                    &self.coarse_nodes[n],
                    self.coarse_rule.bary_weights(),
                    coarse_block,
                    t,
                )
            })
            .collect()
    }

    fn restrict(&self, n: usize, fine_block: &[f64]) -> Vec<f64> {
        if self.config.coarse_degree == self.config.fine_degree {
            return fine_block.to_vec();
        }
        self.coarse_nodes[n]
            .iter()
            .map(|&t| {
                barycentric_eval(
                    &self.fine_nodes[n],
                    self.fine_rule.bary_weights(),
                    fine_block,
                    t,
                )
            })
            .collect()
    }

    /// Initialization sweep: the coarse propagator runs sequentially over all
    /// blocks, and the prolonged result becomes both the first iterate and
    /// the cached coarse prediction.
    pub fn init(&self) -> Result<PararealState> {
        let count = self.partition.count();
        let mut coarse_blocks: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut sweeps = 0u64;
        for n in 0..count {
            let rhs = history_rhs(
                self.problem,
                &self.partition,
                n,
                &self.coarse_rule,
                &coarse_blocks,
            )?;
            let outcome = solve(&self.coarse_matrices[n], &rhs, None, &self.config.linear)?;
            sweeps += outcome.sweeps as u64;
            coarse_blocks.push(outcome.solution);
        }
        let fine_blocks: Vec<Vec<f64>> = (0..count)
            .map(|n| self.prolong(n, &coarse_blocks[n]))
            .collect();
        for (n, block) in fine_blocks.iter().enumerate() {
            ensure_finite(block, n, 0)?;
        }
        let current = NodalSolution::from_blocks(
            self.partition.clone(),
            self.fine_rule.clone(),
            fine_blocks.clone(),
        )?;
        Ok(PararealState {
            k: 0,
            current,
            coarse_prev: fine_blocks,
            increments: Vec::new(),
            fine_sweeps: 0,
            coarse_sweeps: sweeps,
        })
    }

    /// One full iteration: concurrent fine corrections against the frozen
    /// previous iterate, then the sequential coarse prediction and update.
    pub fn step(&self, state: &mut PararealState) -> Result<IterationStats> {
        let count = self.partition.count();
        let iteration = state.k + 1;

        let fine_start = Instant::now();
        let previous = &state.current;
        let correct = |n: usize| -> Result<(Vec<f64>, u64)> {
            let rhs = history_rhs(
                self.problem,
                &self.partition,
                n,
                &self.fine_rule,
                &previous.blocks()[..n],
            )?;
            let outcome = solve(
                &self.fine_matrices[n],
                &rhs,
                Some(previous.block(n)),
                &self.config.linear,
            )?;
            let mut correction = outcome.solution;
            for (c, g) in correction.iter_mut().zip(&state.coarse_prev[n]) {
                *c -= g;
            }
            Ok((correction, outcome.sweeps as u64))
        };
        let corrections: Vec<(Vec<f64>, u64)> = if self.config.parallel {
            let run = || (0..count).into_par_iter().map(correct).collect();
            match &self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        } else {
            (0..count).map(correct).collect::<Result<Vec<_>>>()
        }?;
        let fine_ms = fine_start.elapsed().as_secs_f64() * 1e3;
        let fine_sweeps: u64 = corrections.iter().map(|(_, s)| s).sum();

        let coarse_start = Instant::now();
        let mut coarse_history: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut new_blocks: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut new_coarse_prev: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut coarse_sweeps = 0u64;
        for n in 0..count {
            let rhs = history_rhs(
                self.problem,
                &self.partition,
                n,
                &self.coarse_rule,
                &coarse_history,
            )?;
            let warm = self.restrict(n, state.current.block(n));
            let outcome = solve(
                &self.coarse_matrices[n],
                &rhs,
                Some(&warm),
                &self.config.linear,
            )?;
            coarse_sweeps += outcome.sweeps as u64;
            let prediction = self.prolong(n, &outcome.solution);
            let mut updated = prediction.clone();
            for (u, c) in updated.iter_mut().zip(&corrections[n].0) {
                *u += c;
            }
            ensure_finite(&updated, n, iteration)?;
            coarse_history.push(self.restrict(n, &updated));
            new_blocks.push(updated);
            new_coarse_prev.push(prediction);
        }
        let coarse_ms = coarse_start.elapsed().as_secs_f64() * 1e3;

        let next = NodalSolution::from_blocks(
            self.partition.clone(),
            self.fine_rule.clone(),
            new_blocks,
        )?;
        let increment = state.current.max_nodal_diff(&next);
        state.current = next;
        state.coarse_prev = new_coarse_prev;
        state.k = iteration;
        state.increments.push(increment);
        state.fine_sweeps += fine_sweeps;
        state.coarse_sweeps += coarse_sweeps;

        let linf_error = self
            .problem
            .exact()
            .map(|exact| state.current.linf_error(|t| exact(t)));
        Ok(IterationStats {
            increment,
            linf_error,
            fine_ms,
            coarse_ms,
            fine_sweeps,
            coarse_sweeps,
        })
    }

    /// Initialization followed by iterations until the cap or the stop
    /// tolerance is reached.
    pub fn run(&self) -> Result<(NodalSolution, RunReport)> {
        let init_start = Instant::now();
        let mut state = self.init()?;
        let mut report = RunReport {
            init_ms: init_start.elapsed().as_secs_f64() * 1e3,
            init_sweeps: state.coarse_sweeps,
            init_error: self
                .problem
                .exact()
                .map(|exact| state.current.linf_error(|t| exact(t))),
            ..RunReport::default()
        };
        while state.k < self.config.max_iters {
            let stats = self.step(&mut state)?;
            let increment = stats.increment;
            report.iterations.push(stats);
            if self.config.stop_tol > 0.0 && increment <= self.config.stop_tol {
                report.converged = true;
                break;
            }
        }
        Ok((state.current, report))
    }
}

fn ensure_finite(block: &[f64], n: usize, iteration: usize) -> Result<()> {
    if block.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            block: n,
            iteration,
        });
    }
    Ok(())
}

/// One-shot convenience wrapper around [`Parareal::run`].
pub fn run(
    problem: &VolterraProblem,
    partition: &Partition,
    config: &PararealConfig,
) -> Result<(NodalSolution, RunReport)> {
    Parareal::new(problem, partition.clone(), config.clone())?.run()
}

/// Distance between a converged parareal run and the sequential fine solver
/// over the fine nodes. Errors when the run hits its iteration cap without
/// meeting the stop tolerance.
pub fn fixed_point_gap(
    problem: &VolterraProblem,
    partition: &Partition,
    config: &PararealConfig,
) -> Result<f64> {
    let (solution, report) = run(problem, partition, config)?;
    if !report.converged {
        let increment = report
            .iterations
            .last()
            .map(|s| s.increment)
            .unwrap_or(f64::INFINITY);
        return Err(Error::NotConverged {
            increment,
            tolerance: config.stop_tol,
        });
    }
    let rule = QuadratureRule::gauss_legendre(config.fine_degree)?;
    let sequential = crate::collocation::sequential_solve_with(
        problem,
        partition,
        &rule,
        &config.linear,
    )?
    .0;
    Ok(solution.max_nodal_diff(&sequential))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::sequential_solve;
    use crate::problem::builtin;

    fn partition(n: usize, horizon: f64) -> Partition {
        Partition::uniform(n, horizon).unwrap()
    }

    #[test]
    fn config_rejects_coarse_above_fine() {
        let problem = builtin("poly-manufactured", 1.0).unwrap();
        let config = PararealConfig::new(3, 5);
        assert!(matches!(
            Parareal::new(&problem, partition(2, 1.0), config),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn init_equals_prolonged_coarse_sequential_solve() {
        let problem = builtin("sin-kernel", 4.0).unwrap();
        let part = partition(4, 4.0);
        let config = PararealConfig::new(9, 4);
        let driver = Parareal::new(&problem, part.clone(), config).unwrap();
        let state = driver.init().unwrap();

        let coarse_rule = QuadratureRule::gauss_legendre(4).unwrap();
        let coarse = sequential_solve(&problem, &part, &coarse_rule).unwrap();
        let fine_rule = QuadratureRule::gauss_legendre(9).unwrap();
        let prolonged = coarse.resample(&fine_rule);
        assert_eq!(state.current.max_nodal_diff(&prolonged), 0.0);
    }

    #[test]
    fn zero_iterations_returns_initialization() {
        let problem = builtin("sin-kernel", 4.0).unwrap();
        let part = partition(4, 4.0);
        let config = PararealConfig::new(9, 4).with_max_iters(0);
        let driver = Parareal::new(&problem, part, config).unwrap();
        let (solution, report) = driver.run().unwrap();
        let state = driver.init().unwrap();
        assert_eq!(solution.max_nodal_diff(&state.current), 0.0);
        assert_eq!(report.iterations_run(), 0);
    }

    #[test]
    fn degenerate_equal_degrees_annihilate_the_corrector() {
        let problem = builtin("sin-kernel", 4.0).unwrap();
        let part = partition(4, 4.0);
        let config = PararealConfig::new(10, 10).with_max_iters(5).with_stop_tol(0.0);
        let driver = Parareal::new(&problem, part, config.clone()).unwrap();
        let mut state = driver.init().unwrap();
        let initial = state.current.clone();
        for _ in 0..5 {
            driver.step(&mut state).unwrap();
            let drift = state.current.max_nodal_diff(&initial);
            assert!(
                drift <= 10.0 * config.linear.tolerance,
                "iterate drifted by {drift:e}"
            );
        }
    }

    #[test]
    fn poly_problem_is_exact_from_initialization() {
        let problem = builtin("poly-manufactured", 1.0).unwrap();
        let part = partition(4, 1.0);
        let config = PararealConfig::new(4, 2).with_max_iters(3);
        let (solution, report) = run(&problem, &part, &config).unwrap();
        assert!(report.init_error.unwrap() <= 1e-10);
        assert!(solution.linf_error(|t| t) <= 1e-10);
    }

    #[test]
    fn increments_shrink_on_smooth_problem() {
        let problem = builtin("exp-kernel", 10.0).unwrap();
        let part = partition(5, 10.0);
        let config = PararealConfig::new(12, 4).with_max_iters(8);
        let (_, report) = run(&problem, &part, &config).unwrap();
        assert!(report.converged);
        let first = report.iterations.first().unwrap().increment;
        let last = report.iterations.last().unwrap().increment;
        assert!(last < first * 1e-3, "increments {first:e} -> {last:e}");
    }

    #[test]
    fn parallel_and_serial_runs_are_bit_identical() {
        let problem = builtin("sin-kernel", 8.0).unwrap();
        let part = partition(8, 8.0);
        let base = PararealConfig::new(12, 5).with_max_iters(4).with_stop_tol(0.0);
        let (serial, _) = run(&problem, &part, &base.clone().with_parallel(false)).unwrap();
        let (parallel, _) = run(&problem, &part, &base.with_parallel(true)).unwrap();
        assert_eq!(serial.max_nodal_diff(&parallel), 0.0);
        for (a, b) in serial.blocks().iter().zip(parallel.blocks()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fixed_point_gap_poly() {
        let problem = builtin("poly-manufactured", 1.0).unwrap();
        let part = partition(4, 1.0);
        let config = PararealConfig::new(5, 2).with_max_iters(8);
        let gap = fixed_point_gap(&problem, &part, &config).unwrap();
        assert!(gap <= 1e-10, "gap {gap:e}");
    }

    #[test]
    fn fixed_point_gap_requires_convergence() {
        let problem = builtin("sin-kernel", 8.0).unwrap();
        let part = partition(8, 8.0);
        let config = PararealConfig::new(12, 5)
            .with_max_iters(1)
            .with_stop_tol(1e-14);
        assert!(matches!(
            fixed_point_gap(&problem, &part, &config),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn divergence_reports_block_and_iteration() {
        use std::sync::Arc;
        // A kernel this large at dt = 2.5 makes the iteration blow up fast.
        let problem = crate::problem::VolterraProblem::new(
            "stiff",
            10.0,
            Arc::new(|_, _| 40.0),
            Arc::new(|t: f64| t.sin()),
        )
        .unwrap();
        let part = partition(4, 10.0);
        let config = PararealConfig::new(6, 2).with_max_iters(60).with_stop_tol(0.0);
        let result = run(&problem, &part, &config);
        match result {
            Err(Error::Divergence { .. }) => {}
            Err(other) => panic!("unexpected error {other:?}"),
            Ok((_, report)) => {
                let last = report.iterations.last().unwrap().increment;
                assert!(last.is_finite());
            }
        }
    }
}

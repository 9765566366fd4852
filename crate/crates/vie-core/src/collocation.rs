//! Per-subinterval spectral collocation for the partitioned Volterra system.
//!
//! The horizon is split into `N` uniform subintervals. On block `n` the
//! unknown is a polynomial represented by its values at the mapped
//! Legendre-Gauss nodes; collocating the integral equation at those nodes
//! yields one dense system `(I - A) p = f` per block, where the right-hand
//! side carries the memory terms contributed by all earlier blocks. Chaining
//! the block solves front to back gives the sequential solver, which is also
//! the fixed point that the parareal iteration converges to.

use crate::error::{Error, Result};
use crate::linear::{local_solve, DenseMatrix, LinearSolveConfig, LocalSystem};
use crate::problem::VolterraProblem;
use crate::quadrature::{barycentric_basis, barycentric_eval, QuadratureRule};

/// Uniform partition of `[0, T]` into `N` subintervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    count: usize,
    horizon: f64,
    dt: f64,
    breakpoints: Vec<f64>,
}

impl Partition {
    pub fn uniform(count: usize, horizon: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("partition needs at least one subinterval".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let dt = horizon / count as f64;
        let mut breakpoints: Vec<f64> = (0..=count).map(|n| n as f64 * dt).collect();
        breakpoints[count] = horizon;
        Ok(Self {
            count,
            horizon,
            dt,
            breakpoints,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Endpoints `(t_n, t_{n+1})` of block `n` (0-based).
    pub fn interval(&self, n: usize) -> (f64, f64) {
        (self.breakpoints[n], self.breakpoints[n + 1])
    }

    /// Block owning time `t`. Interior breakpoints resolve to the left
    /// block; `t = 0` belongs to block 0.
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfDomain {
                t,
                horizon: self.horizon,
            });
        }
        if t == 0.0 {
            return Ok(0);
        }
        let n = self
            .breakpoints
            .partition_point(|&b| b < t)
            .clamp(1, self.count);
        Ok(n - 1)
    }

    /// Mapped collocation nodes of `rule` on block `n`.
    pub fn mapped_nodes(&self, n: usize, rule: &QuadratureRule) -> Vec<f64> {
        let (a, b) = self.interval(n);
        affine_nodes(rule.nodes(), a, b)
    }
}

#[inline]
fn affine_nodes(reference: &[f64], a: f64, b: f64) -> Vec<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    reference.iter().map(|&x| half * x + mid).collect()
}

/// Piecewise polynomial stored as nodal values at the mapped Legendre-Gauss
/// nodes of each block.
#[derive(Debug, Clone)]
pub struct NodalSolution {
    partition: Partition,
    rule: QuadratureRule,
    blocks: Vec<Vec<f64>>,
}

impl NodalSolution {
    pub fn from_blocks(
        partition: Partition,
        rule: QuadratureRule,
        blocks: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if blocks.len() != partition.count() {
            return Err(Error::DimensionMismatch {
                expected: partition.count(),
                got: blocks.len(),
            });
        }
        for block in &blocks {
            if block.len() != rule.len() {
                return Err(Error::DimensionMismatch {
                    expected: rule.len(),
                    got: block.len(),
                });
            }
        }
        Ok(Self {
            partition,
            rule,
            blocks,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn degree(&self) -> usize {
        self.rule.degree()
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn block(&self, n: usize) -> &[f64] {
        &self.blocks[n]
    }

    /// Pointwise readout. Breakpoint ties go to the left block, `t = 0` to
    /// block 0; the mapped nodes themselves return stored values bit-exactly.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let n = self.partition.locate(t)?;
        Ok(self.evaluate_in_block(n, t))
    }

    fn evaluate_in_block(&self, n: usize, t: f64) -> f64 {
        let nodes = self.partition.mapped_nodes(n, &self.rule);
        barycentric_eval(&nodes, self.rule.bary_weights(), &self.blocks[n], t)
    }

    /// Re-represents every block on `target`'s mapped nodes: degree-lowering
    /// truncates by interpolation, degree-raising is exact prolongation.
    pub fn resample(&self, target: &QuadratureRule) -> NodalSolution {
        if target.degree() == self.rule.degree() {
            return NodalSolution {
                partition: self.partition.clone(),
                rule: target.clone(),
                blocks: self.blocks.clone(),
            };
        }
        let blocks = (0..self.blocks.len())
            .map(|n| {
                let (a, b) = self.partition.interval(n);
                resample_block(&self.blocks[n], &self.rule, target, a, b)
            })
            .collect();
        NodalSolution {
            partition: self.partition.clone(),
            rule: target.clone(),
            blocks,
        }
    }

    /// Max absolute difference over the shared nodal grid.
    pub fn max_nodal_diff(&self, other: &NodalSolution) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            for (&x, &y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    /// L-infinity distance to `exact`, probed at every mapped node plus 101
    /// equispaced points per subinterval (breakpoints included).
    pub fn linf_error<F: Fn(f64) -> f64>(&self, exact: F) -> f64 {
        const PROBES_PER_BLOCK: usize = 101;
        let bary = self.rule.bary_weights();
        let mut worst = 0.0f64;
        for n in 0..self.blocks.len() {
            let (a, b) = self.partition.interval(n);
            let nodes = self.partition.mapped_nodes(n, &self.rule);
            for (&t, &v) in nodes.iter().zip(&self.blocks[n]) {
                worst = worst.max((v - exact(t)).abs());
            }
            let step = (b - a) / (PROBES_PER_BLOCK - 1) as f64;
            for k in 0..PROBES_PER_BLOCK {
                let t = a + step * k as f64;
                let v = barycentric_eval(&nodes, bary, &self.blocks[n], t);
                worst = worst.max((v - exact(t)).abs());
            }
        }
        worst
    }
}

fn resample_block(
    values: &[f64],
    source_rule: &QuadratureRule,
    target_rule: &QuadratureRule,
    a: f64,
    b: f64,
) -> Vec<f64> {
    let source_nodes = affine_nodes(source_rule.nodes(), a, b);
    let target_nodes = affine_nodes(target_rule.nodes(), a, b);
    target_nodes
        .iter()
        .map(|&t| barycentric_eval(&source_nodes, source_rule.bary_weights(), values, t))
        .collect()
}

/// Collocation matrix `I - A` of block `n`: entry `(i, j)` couples collocation
/// node `i` to basis function `j` through the within-block memory integral
/// `int_{t_n}^{xi_i} K(xi_i, s) h_j(s) ds`, evaluated by the same-degree
/// quadrature mapped onto `[t_n, xi_i]`.
pub fn assemble_matrix(
    problem: &VolterraProblem,
    partition: &Partition,
    n: usize,
    rule: &QuadratureRule,
) -> Result<DenseMatrix> {
    if n >= partition.count() {
        return Err(Error::IndexOutOfRange {
            index: n,
            count: partition.count(),
        });
    }
    let size = rule.len();
    let (a, _) = partition.interval(n);
    let collocation_nodes = partition.mapped_nodes(n, rule);
    let bary = rule.bary_weights();
    let mut matrix = DenseMatrix::identity(size);
    let mut basis = vec![0.0; size];
    for i in 0..size {
        let xi = collocation_nodes[i];
        let half = 0.5 * (xi - a);
        let mid = 0.5 * (xi + a);
        for q in 0..size {
            let s = half * rule.nodes()[q] + mid;
            let scaled_kernel = half * problem.kernel(xi, s) * rule.weights()[q];
            barycentric_basis(&collocation_nodes, bary, s, &mut basis);
            let row = matrix.row_mut(i);
            for j in 0..size {
                row[j] -= scaled_kernel * basis[j];
            }
        }
    }
    Ok(matrix)
}

/// Right-hand side of block `n`: source samples plus the memory terms of all
/// earlier blocks. Because the partition is uniform, the quadrature points of
/// each memory integral coincide with block `j`'s own stored nodes, so the
/// history values are read without interpolation.
pub fn history_rhs(
    problem: &VolterraProblem,
    partition: &Partition,
    n: usize,
    rule: &QuadratureRule,
    history: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if n >= partition.count() {
        return Err(Error::IndexOutOfRange {
            index: n,
            count: partition.count(),
        });
    }
    if history.len() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: history.len(),
        });
    }
    let size = rule.len();
    let collocation_nodes = partition.mapped_nodes(n, rule);
    let mut rhs: Vec<f64> = collocation_nodes.iter().map(|&t| problem.source(t)).collect();
    let half_dt = 0.5 * partition.dt();
    for (j, block) in history.iter().enumerate().take(n) {
        if block.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: block.len(),
            });
        }
        let memory_nodes = partition.mapped_nodes(j, rule);
        for q in 0..size {
            let factor = half_dt * rule.weights()[q] * block[q];
            let s = memory_nodes[q];
            for (i, r) in rhs.iter_mut().enumerate() {
                *r += factor * problem.kernel(collocation_nodes[i], s);
            }
        }
    }
    Ok(rhs)
}

/// Solves block `n` against the given history: assemble, build the memory
/// right-hand side, and run the warm-started local solve. Returns the nodal
/// values and the Gauss-Seidel sweep count.
pub fn propagate_warm(
    problem: &VolterraProblem,
    partition: &Partition,
    n: usize,
    rule: &QuadratureRule,
    history: &[Vec<f64>],
    warm_start: Option<&[f64]>,
    config: &LinearSolveConfig,
) -> Result<(Vec<f64>, u64)> {
    let matrix = assemble_matrix(problem, partition, n, rule)?;
    let rhs = history_rhs(problem, partition, n, rule, history)?;
    let system = LocalSystem { matrix, rhs };
    let outcome = local_solve(&system, warm_start, config)?;
    Ok((outcome.solution, outcome.sweeps as u64))
}

/// [`propagate_warm`] with a cold start and default solver settings.
pub fn propagate(
    problem: &VolterraProblem,
    partition: &Partition,
    n: usize,
    rule: &QuadratureRule,
    history: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let (block, _) = propagate_warm(
        problem,
        partition,
        n,
        rule,
        history,
        None,
        &LinearSolveConfig::default(),
    )?;
    Ok(block)
}

/// Classical sequential solver: blocks are propagated front to back, each
/// consuming all previously computed blocks. Returns the solution and the
/// total sweep count.
pub fn sequential_solve_with(
    problem: &VolterraProblem,
    partition: &Partition,
    rule: &QuadratureRule,
    config: &LinearSolveConfig,
) -> Result<(NodalSolution, u64)> {
    let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(partition.count());
    let mut sweeps = 0u64;
    for n in 0..partition.count() {
        let (block, s) = propagate_warm(problem, partition, n, rule, &blocks, None, config)?;
        sweeps += s;
        blocks.push(block);
    }
    let solution = NodalSolution::from_blocks(partition.clone(), rule.clone(), blocks)?;
    Ok((solution, sweeps))
}

/// [`sequential_solve_with`] under default solver settings.
pub fn sequential_solve(
    problem: &VolterraProblem,
    partition: &Partition,
    rule: &QuadratureRule,
) -> Result<NodalSolution> {
    let (solution, _) = sequential_solve_with(problem, partition, rule, &LinearSolveConfig::default())?;
    Ok(solution)
}

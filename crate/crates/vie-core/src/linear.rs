//! Dense local systems and their iterative solution.
//!
//! Each collocation block produces one small dense system. These are solved
//! by warm-started Gauss-Seidel sweeps; if the sweeps stall, a direct
//! elimination with partial pivoting takes over.

use crate::error::{Error, Result};

/// Square dense matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    /// Max-norm residual `||A x - b||_inf`.
    pub fn residual_inf(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let ax: f64 = self.row(i).iter().zip(x).map(|(&a, &v)| a * v).sum();
            worst = worst.max((ax - b[i]).abs());
        }
        worst
    }
}

/// One block's collocation system `(I - A) p = f`.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

/// Controls for the Gauss-Seidel solve.
#[derive(Debug, Clone)]
pub struct LinearSolveConfig {
    /// Relative residual threshold, measured as
    /// `||A p - f||_inf / max(1, ||f||_inf)`.
    pub tolerance: f64,
    pub max_sweeps: u32,
    /// Fall back to direct elimination when the sweeps do not converge.
    pub fallback: bool,
}

impl Default for LinearSolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_sweeps: 200,
            fallback: true,
        }
    }
}

/// Result of a local solve, with the sweep count for the cost report.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Vec<f64>,
    pub sweeps: u32,
    pub used_fallback: bool,
}

/// Solves `system.matrix * p = system.rhs` by Gauss-Seidel sweeps starting
/// from `warm_start` (zeros when absent). The residual is checked before the
/// first sweep, so an already-converged warm start costs zero sweeps.
pub fn local_solve(
    system: &LocalSystem,
    warm_start: Option<&[f64]>,
    config: &LinearSolveConfig,
) -> Result<SolveOutcome> {
    solve(&system.matrix, &system.rhs, warm_start, config)
}

/// [`local_solve`] against a borrowed matrix; lets callers reuse an assembled
/// matrix across many right-hand sides.
pub fn solve(
    matrix: &DenseMatrix,
    rhs: &[f64],
    warm_start: Option<&[f64]>,
    config: &LinearSolveConfig,
) -> Result<SolveOutcome> {
    let n = matrix.size();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut p = match warm_start {
        Some(w) => {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.len(),
                });
            }
            w.to_vec()
        }
        None => vec![0.0; n],
    };
    let scale = rhs.iter().fold(1.0f64, |m, &v| m.max(v.abs()));

    let mut sweeps = 0u32;
    loop {
        let residual = matrix.residual_inf(&p, rhs);
        if residual <= config.tolerance * scale {
            return Ok(SolveOutcome {
                solution: p,
                sweeps,
                used_fallback: false,
            });
        }
        if sweeps >= config.max_sweeps {
            if config.fallback {
                let solution = lu_solve(matrix, rhs)?;
                return Ok(SolveOutcome {
                    solution,
                    sweeps,
                    used_fallback: true,
                });
            }
            return Err(Error::NoConvergence {
                sweeps,
                residual: residual / scale,
            });
        }
        for i in 0..n {
            let row = matrix.row(i);
            let mut s = rhs[i];
            for j in 0..n {
                if j != i {
                    s -= row[j] * p[j];
                }
            }
            p[i] = s / row[i];
        }
        sweeps += 1;
    }
}

/// Direct elimination with partial pivoting.
pub fn lu_solve(matrix: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.size();
    let mut a = matrix.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = a.get(col, col).abs();
        for r in col + 1..n {
            let v = a.get(r, col).abs();
            if v > pivot {
                pivot = v;
                pivot_row = r;
            }
        }
        if !(pivot > 1e-300) || !pivot.is_finite() {
            return Err(Error::SingularSystem { column: col, pivot });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(pivot_row, j));
                a.set(pivot_row, j, tmp);
            }
            b.swap(col, pivot_row);
        }
        let diag = a.get(col, col);
        for r in col + 1..n {
            let factor = a.get(r, col) / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a.get(r, j) - factor * a.get(col, j);
                a.set(r, j, v);
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a.get(i, j) * x[j];
        }
        x[i] = s / a.get(i, i);
    }
    Ok(x)
}

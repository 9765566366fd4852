//! Solvers for linear second-kind Volterra integral equations
//! `u(t) - int_0^t K(t,s) u(s) ds = g(t)` on `[0, T]`.
//!
//! The horizon is partitioned into uniform subintervals carrying per-block
//! Legendre-Gauss spectral collocation solves. Two entry points share that
//! machinery:
//!
//! * [`collocation::sequential_solve`] chains the block solves front to back
//!   (the classical approach, and the reference fixed point);
//! * [`parareal::Parareal`] iterates a cheap sequential coarse prediction
//!   against concurrently computed fine corrections, converging to the same
//!   fixed point in a handful of sweeps.
//!
//! [`problem::builtin`] registers the benchmark equations used by the
//! convergence experiments; each carries an exact solution validated at
//! registration by a quadrature residual gate.

pub mod collocation;
pub mod error;
pub mod linear;
pub mod parareal;
pub mod problem;
pub mod quadrature;

pub use collocation::{
    assemble_matrix, history_rhs, propagate, propagate_warm, sequential_solve,
    sequential_solve_with, NodalSolution, Partition,
};
pub use error::{Error, Result};
pub use linear::{local_solve, DenseMatrix, LinearSolveConfig, LocalSystem, SolveOutcome};
pub use parareal::{
    fixed_point_gap, run as parareal_run, IterationStats, Parareal, PararealConfig,
    PararealState, RunReport,
};
pub use problem::{builtin, builtin_names, residual_check, VolterraProblem};
pub use quadrature::{
    barycentric_eval, barycentric_weights, default_lebesgue_samples, discrete_inner_product,
    lebesgue_constant, legendre_pair, MappedRule, QuadratureRule,
};

//! Volterra problem definitions and the built-in benchmark registry.
//!
//! A problem is the triple `(K, g, T)` of the canonical second-kind form
//! `u(t) - int_0^t K(t,s) u(s) ds = g(t)` on `[0, T]`, optionally carrying
//! the exact solution. Built-ins with an exact solution are validated at
//! registration by a high-order quadrature residual check, so the source
//! terms cannot silently drift out of sync with the stated solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Tolerance of the registration self-consistency gate.
pub const RESIDUAL_GATE: f64 = 1e-8;

/// A linear second-kind Volterra integral equation on `[0, T]`.
#[derive(Clone)]
pub struct VolterraProblem {
    name: String,
    horizon: f64,
    kernel: KernelFn,
    source: ScalarFn,
    exact: Option<ScalarFn>,
}

impl std::fmt::Debug for VolterraProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VolterraProblem")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl VolterraProblem {
    /// Builds a problem and spot-checks kernel and source for non-finite
    /// values on a coarse grid of the domain `0 <= s <= t <= T`.
    pub fn new(
        name: impl Into<String>,
        horizon: f64,
        kernel: KernelFn,
        source: ScalarFn,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let problem = Self {
            name: name.into(),
            horizon,
            kernel,
            source,
            exact: None,
        };
        problem.spot_check()?;
        Ok(problem)
    }

    /// Attaches an exact solution without running the residual gate; use
    /// [`builtin`] or call [`residual_check`] for validated registration.
    pub fn with_exact(mut self, exact: ScalarFn) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    #[inline]
    pub fn kernel(&self, t: f64, s: f64) -> f64 {
        (self.kernel)(t, s)
    }

    #[inline]
    pub fn source(&self, t: f64) -> f64 {
        (self.source)(t)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self) -> Option<&ScalarFn> {
        self.exact.as_ref()
    }

    pub fn exact_at(&self, t: f64) -> Option<f64> {
        self.exact.as_ref().map(|f| f(t))
    }

    fn spot_check(&self) -> Result<()> {
        const GRID: usize = 17;
        for i in 0..GRID {
            let t = self.horizon * i as f64 / (GRID - 1) as f64;
            if !self.source(t).is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "source is non-finite at t = {t}"
                )));
            }
            for j in 0..=i {
                let s = self.horizon * j as f64 / (GRID - 1) as f64;
                if !self.kernel(t, s).is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "kernel is non-finite at (t, s) = ({t}, {s})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Names accepted by [`builtin`].
pub fn builtin_names() -> [&'static str; 3] {
    ["sin-kernel", "exp-kernel", "poly-manufactured"]
}

/// Constructs one of the built-in benchmark problems on `[0, T]`.
///
/// All three carry exact solutions and must pass the registration residual
/// gate; a failure means a compiled-in source term is wrong and panics.
/// Each source term is derived symbolically from its kernel/exact-solution
/// pair (note the memory integral of any second-kind problem vanishes at
/// t = 0, which pins `g(0) = u(0)`) and the gate re-checks the derivation
/// numerically.
///
/// * `sin-kernel`: `u + int sin(pi(t-s)) u = g`, cast to canonical form via
///   `K(t,s) = -sin(pi(t-s))`, exact `u(t) = sin(pi t)`,
///   `g(t) = (1 + 1/(2 pi)) sin(pi t) - (t/2) cos(pi t)`.
/// * `exp-kernel`: `K(t,s) = (t-s) e^{s-t}`, exact
///   `u(t) = (2t - 1 + e^{-2t}) / 4`, `g(t) = 1 - (1+t) e^{-t}`.
/// * `poly-manufactured`: `K = 1`, `g(t) = t - t^2/2`, exact `u(t) = t`.
pub fn builtin(name: &str, horizon: f64) -> Result<VolterraProblem> {
    let problem = match name {
        "sin-kernel" => VolterraProblem::new(
            name,
            horizon,
            Arc::new(|t: f64, s: f64| -(PI * (t - s)).sin()),
            Arc::new(|t: f64| {
                (1.0 + 1.0 / (2.0 * PI)) * (PI * t).sin() - 0.5 * t * (PI * t).cos()
            }),
        )?
        .with_exact(Arc::new(|t: f64| (PI * t).sin())),
        "exp-kernel" => VolterraProblem::new(
            name,
            horizon,
            Arc::new(|t: f64, s: f64| (t - s) * (s - t).exp()),
            Arc::new(|t: f64| 1.0 - (1.0 + t) * (-t).exp()),
        )?
        .with_exact(Arc::new(|t: f64| (2.0 * t - 1.0 + (-2.0 * t).exp()) / 4.0)),
        "poly-manufactured" => VolterraProblem::new(
            name,
            horizon,
            Arc::new(|_t: f64, _s: f64| 1.0),
            Arc::new(|t: f64| t - 0.5 * t * t),
        )?
        .with_exact(Arc::new(|t: f64| t)),
        other => return Err(Error::UnknownProblem(other.to_string())),
    };
    let residual = residual_check(&problem, 20)?;
    assert!(
        residual <= RESIDUAL_GATE,
        "built-in `{name}` failed its self-consistency gate: residual {residual:e}"
    );
    Ok(problem)
}

/// Maximum residual `|u(t) - int_0^t K(t,s) u(s) ds - g(t)|` of the stored
/// exact solution at `t_samples` sample times, with the memory integral
/// evaluated by a composite degree-50 rule on 32 panels per sample.
pub fn residual_check(problem: &VolterraProblem, t_samples: usize) -> Result<f64> {
    const ORACLE_DEGREE: usize = 50;
    const ORACLE_PANELS: usize = 32;
    let exact = problem
        .exact()
        .ok_or_else(|| Error::NoExactSolution(problem.name().to_string()))?;
    assert!(t_samples > 0, "need at least one sample time");

    let rule = QuadratureRule::gauss_legendre(ORACLE_DEGREE)?;
    let mut worst = 0.0f64;
    for i in 1..=t_samples {
        let t = problem.horizon() * i as f64 / t_samples as f64;
        let mut integral = 0.0;
        for panel in 0..ORACLE_PANELS {
            let a = t * panel as f64 / ORACLE_PANELS as f64;
            let b = t * (panel + 1) as f64 / ORACLE_PANELS as f64;
            let mapped = rule.map_to(a, b)?;
            integral += mapped.integrate(|s| problem.kernel(t, s) * exact(s));
        }
        let residual = (exact(t) - integral - problem.source(t)).abs();
        worst = worst.max(residual);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(
            builtin("cubic-kernel", 1.0),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn builtin_exact_values() {
        let poly = builtin("poly-manufactured", 1.0).unwrap();
        assert_eq!(poly.exact_at(0.5), Some(0.5));

        let sin = builtin("sin-kernel", 100.0).unwrap();
        assert_abs_diff_eq!(sin.exact_at(0.5).unwrap(), 1.0, epsilon = 1e-15);

        let exp = builtin("exp-kernel", 100.0).unwrap();
        assert_abs_diff_eq!(exp.exact_at(0.0).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_gate_poly_is_quadrature_exact() {
        let poly = builtin("poly-manufactured", 1.0).unwrap();
        assert!(residual_check(&poly, 20).unwrap() <= 1e-12);
    }

    #[test]
    fn residual_gate_all_builtins() {
        for name in builtin_names() {
            let horizon = if name == "poly-manufactured" { 1.0 } else { 100.0 };
            let problem = builtin(name, horizon).unwrap();
            let residual = residual_check(&problem, 20).unwrap();
            assert!(
                residual <= RESIDUAL_GATE,
                "{name}: residual {residual:e}"
            );
        }
    }

    #[test]
    fn residual_check_requires_exact_solution() {
        let problem = VolterraProblem::new(
            "bare",
            1.0,
            Arc::new(|_, _| 0.0),
            Arc::new(|t| t),
        )
        .unwrap();
        assert!(matches!(
            residual_check(&problem, 5),
            Err(Error::NoExactSolution(_))
        ));
    }

    #[test]
    fn non_finite_source_is_caught_at_construction() {
        let result = VolterraProblem::new(
            "bad",
            1.0,
            Arc::new(|_, _| 1.0),
            Arc::new(|t| 1.0 / (t - 0.5)),
        );
        assert!(matches!(result, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn builtins_are_value_semantic() {
        let a = builtin("sin-kernel", 10.0).unwrap();
        let b = builtin("sin-kernel", 10.0).unwrap();
        for i in 0..=40 {
            let t = 10.0 * i as f64 / 40.0;
            assert_eq!(a.source(t), b.source(t));
            assert_eq!(a.exact_at(t), b.exact_at(t));
            for j in 0..=i {
                let s = 10.0 * j as f64 / 40.0;
                assert_eq!(a.kernel(t, s), b.kernel(t, s));
            }
        }
    }
}

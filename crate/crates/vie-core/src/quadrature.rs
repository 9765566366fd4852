//! Legendre-Gauss quadrature and barycentric Lagrange interpolation.
//!
//! A rule of degree `M` holds the `M+1` roots of the Legendre polynomial
//! of degree `M+1` together with the classical quadrature weights, so it
//! integrates polynomials up to degree `2M+1` exactly. The barycentric
//! weights of the node set are precomputed once and shared by every
//! interpolation performed on the rule (second barycentric form, O(M) per
//! evaluation).

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

/// Evaluates the Legendre polynomial of degree `n` and its derivative at `x`
/// by the three-term recurrence. Total on all of `[-1, 1]`; endpoints are exact.
pub fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut dp_prev = 0.0;
    let mut dp = 1.0;
    for k in 1..n {
        let kf = k as f64;
        let a = (2.0 * kf + 1.0) / (kf + 1.0);
        let b = kf / (kf + 1.0);
        let p_next = a * x * p - b * p_prev;
        let dp_next = a * (p + x * dp) - b * dp_prev;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Legendre-Gauss rule on `[-1, 1]`: nodes, weights and barycentric weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary_weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the degree-`M` rule (`M+1` nodes). Roots of the Legendre
    /// polynomial of degree `M+1` are found by Newton iteration started from
    /// Chebyshev-based guesses, then symmetrized so that node `i` is the exact
    /// negation of node `M-i` and paired weights are bit-identical.
    pub fn gauss_legendre(degree: usize) -> Result<Self> {
        let count = degree + 1;
        let mut nodes = vec![0.0; count];
        for (i, slot) in nodes.iter_mut().enumerate() {
            let guess = -(std::f64::consts::PI * (4 * i + 3) as f64 / (4 * count + 2) as f64).cos();
            *slot = newton_root(count, guess).ok_or(Error::RootFindingFailed {
                degree,
                node: i,
            })?;
        }
        // Symmetrize: average each root with the negation of its mirror.
        for i in 0..count / 2 {
            let s = 0.5 * (nodes[i] - nodes[count - 1 - i]);
            nodes[i] = s;
            nodes[count - 1 - i] = -s;
        }
        if count % 2 == 1 {
            nodes[count / 2] = 0.0;
        }
        let mut weights = vec![0.0; count];
        for i in 0..count.div_ceil(2) {
            let x = nodes[i];
            let (_, dp) = legendre_pair(count, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[count - 1 - i] = w;
        }
        let bary_weights = barycentric_weights(&nodes);
        Ok(Self {
            degree,
            nodes,
            weights,
            bary_weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes, `degree + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bary_weights(&self) -> &[f64] {
        &self.bary_weights
    }

    /// Quadrature of `f` over `[-1, 1]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Barycentric evaluation of the interpolant of `values` at `x`.
    /// Hitting a node bit-exactly returns the stored value.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        barycentric_eval(&self.nodes, &self.bary_weights, values, x)
    }

    /// Affine image of the rule on `[a, b]`.
    pub fn map_to(&self, a: f64, b: f64) -> Result<MappedRule> {
        if !(a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let nodes = self.nodes.iter().map(|&x| half * x + mid).collect();
        let weights = self.weights.iter().map(|&w| half * w).collect();
        Ok(MappedRule {
            parent: self.clone(),
            a,
            b,
            nodes,
            weights,
        })
    }
}

/// A quadrature rule carried onto an interval `[a, b]` by the affine map
/// `x -> (b-a)/2 x + (b+a)/2`. The parent's barycentric weights stay valid
/// because the affine map rescales all of them by the same factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedRule {
    parent: QuadratureRule,
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl MappedRule {
    pub fn parent(&self) -> &QuadratureRule {
        &self.parent
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        barycentric_eval(&self.nodes, self.parent.bary_weights(), values, t)
    }
}

/// Discrete inner product `(f, g)_M = sum_i f_i g_i w_i` on the rule's nodes.
pub fn discrete_inner_product(f_vals: &[f64], g_vals: &[f64], rule: &QuadratureRule) -> Result<f64> {
    if f_vals.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            got: f_vals.len(),
        });
    }
    if g_vals.len() != rule.len() {
        return Err(Error::DimensionMismatch {
            expected: rule.len(),
            got: g_vals.len(),
        });
    }
    Ok(f_vals
        .iter()
        .zip(g_vals)
        .zip(rule.weights())
        .map(|((&f, &g), &w)| f * g * w)
        .sum())
}

/// Max over a uniform grid of `samples` points in `[-1, 1]` of the sum of
/// absolute values of the Lagrange basis functions.
pub fn lebesgue_constant(rule: &QuadratureRule, samples: usize) -> f64 {
    assert!(samples >= 1000, "lebesgue_constant needs at least 1000 samples");
    let nodes = rule.nodes();
    let bary = rule.bary_weights();
    let step = 2.0 / (samples - 1) as f64;
    let mut best = 0.0f64;
    for k in 0..samples {
        let x = -1.0 + step * k as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        let mut hit = false;
        for (&node, &lam) in nodes.iter().zip(bary) {
            let d = x - node;
            if d == 0.0 {
                hit = true;
                break;
            }
            let term = lam / d;
            num += term.abs();
            den += term;
        }
        let value = if hit { 1.0 } else { num / den.abs() };
        best = best.max(value);
    }
    best
}

/// Sampling resolution used by the default Lebesgue-constant sweep:
/// `10 (M+1)^2` grid points, floored at 1000 and capped at `10^6`.
pub fn default_lebesgue_samples(degree: usize) -> usize {
    (10 * (degree + 1) * (degree + 1)).clamp(1000, 1_000_000)
}

/// Normalized barycentric weights `1 / prod_{k != j} (x_j - x_k)` of a node set.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut lam = vec![1.0; n];
    for j in 0..n {
        let mut prod = 1.0;
        for k in 0..n {
            if k != j {
                prod *= nodes[j] - nodes[k];
            }
        }
        lam[j] = 1.0 / prod;
    }
    let scale = lam.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    for v in &mut lam {
        *v /= scale;
    }
    lam
}

/// Second-form barycentric interpolation of `values` at `x`; an exact node
/// hit short-circuits to the stored value.
pub fn barycentric_eval(nodes: &[f64], bary: &[f64], values: &[f64], x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..nodes.len() {
        let d = x - nodes[i];
        if d == 0.0 {
            return values[i];
        }
        let term = bary[i] / d;
        num += term * values[i];
        den += term;
    }
    num / den
}

/// Values of all Lagrange basis functions of the node set at `x`, written
/// into `out`. Used by the collocation assembly.
pub fn barycentric_basis(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), nodes.len());
    let mut den = 0.0;
    for i in 0..nodes.len() {
        let d = x - nodes[i];
        if d == 0.0 {
            out.fill(0.0);
            out[i] = 1.0;
            return;
        }
        out[i] = bary[i] / d;
        den += out[i];
    }
    for v in out.iter_mut() {
        *v /= den;
    }
}

fn newton_root(poly_degree: usize, guess: f64) -> Option<f64> {
    let mut x = guess;
    for _ in 0..NEWTON_MAX_ITERS {
        let (p, dp) = legendre_pair(poly_degree, x);
        let dx = p / dp;
        x -= dx;
        if dx.abs() <= NEWTON_TOL {
            return Some(x);
        }
    }
    None
}

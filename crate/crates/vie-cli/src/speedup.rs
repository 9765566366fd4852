//! Operation-count model of the parallel speedup.
//!
//! Model units count the dominant matrix-vector work with unit constants:
//! the sequential fine solver costs `N M^3`, one parareal iteration costs a
//! sequential coarse sweep (`N Mc^2` plus `N M Mc` fine-to-coarse
//! interpolation), one fine solve (`M^2`), and the coarse-to-fine
//! interpolation of the update (`N M Mc`). The asymptotic bound is the
//! reciprocal-sum form of the same ratio.

/// Cost-model evaluation for one `(N, M, Mc, K)` operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEstimate {
    pub subintervals: usize,
    pub fine_degree: usize,
    pub coarse_degree: usize,
    pub iterations: usize,
    /// `N M^3` model units.
    pub sequential_cost: f64,
    /// `K (N Mc^2 + N M Mc + M^2 + N M Mc)` model units.
    pub parareal_cost: f64,
    /// `sequential_cost / parareal_cost`.
    pub speedup: f64,
    /// `(K Mc^2/M^3 + K Mc/M^2 + K/(N M))^{-1}`.
    pub asymptotic_bound: f64,
}

/// Evaluates the cost model. All parameters must be positive with `Mc < M`.
pub fn speedup_estimate(
    subintervals: usize,
    fine_degree: usize,
    coarse_degree: usize,
    iterations: usize,
) -> CostEstimate {
    assert!(subintervals > 0, "N must be positive");
    assert!(fine_degree > 0, "M must be positive");
    assert!(coarse_degree > 0, "Mc must be positive");
    assert!(iterations > 0, "K must be positive");
    assert!(
        coarse_degree < fine_degree,
        "Mc must be strictly below M"
    );
    let n = subintervals as f64;
    let m = fine_degree as f64;
    let mc = coarse_degree as f64;
    let k = iterations as f64;

    let sequential_cost = n * m * m * m;
    let parareal_cost = k * (n * mc * mc + n * m * mc + m * m + n * m * mc);
    let speedup = sequential_cost / parareal_cost;
    let base = mc * mc / (m * m * m) + mc / (m * m) + 1.0 / (n * m);
    let asymptotic_bound = 1.0 / (k * base);
    CostEstimate {
        subintervals,
        fine_degree,
        coarse_degree,
        iterations,
        sequential_cost,
        parareal_cost,
        speedup,
        asymptotic_bound,
    }
}

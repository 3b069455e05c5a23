//! Solves `(I + L) x = b` by Jacobi-preconditioned conjugate gradients.
//!
//! `I + L` is symmetric, strictly diagonally dominant and has spectrum in
//! `[1, 1 + 2·d_max]`, so CG with a diagonal preconditioner converges in
//! `O(√d_max · log 1/δ)` iterations, each costing `O(n + m)`.
//!
//! The stopping rule is the relative residual `‖(I+L)y − b‖ / ‖b‖ ≤ δ`.
//! The error in the `(I+L)`-norm satisfies
//! `‖y − x‖_{I+L} / ‖x‖_{I+L} ≤ √κ · ‖r‖ / ‖b‖` with `κ = 1 + 2·d_max`;
//! [`energy_to_residual_tolerance`] converts an energy-norm target into a
//! residual target with that factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{try_map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Target relative residual.
    pub tolerance: f64,
    /// Iteration cap; `None` means `10·√n + 100`.
    pub max_iterations: Option<usize>,
    /// Unused by CG, kept so randomized solvers can share the interface.
    pub seed: Option<u64>,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-8,
            max_iterations: None,
            seed: None,
            execution: Execution::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        SolveOptions {
            tolerance,
            ..Default::default()
        }
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = Some(max_iterations);
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn iteration_limit(&self, n: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (10.0 * (n as f64).sqrt()).ceil() as usize + 100)
    }
}

/// Outcome of a single converged solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Residual tolerance that guarantees a relative `(I+L)`-norm error of at
/// most `energy_tolerance` on `g`.
pub fn energy_to_residual_tolerance(g: &Graph, energy_tolerance: f64) -> f64 {
    let kappa = 1.0 + 2.0 * g.max_degree() as f64;
    energy_tolerance / kappa.sqrt()
}

pub fn solve(g: &Graph, b: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    solve_detailed(g, b, opts).map(|s| s.x)
}

pub fn solve_detailed(g: &Graph, b: &[f64], opts: &SolveOptions) -> Result<Solution> {
    opts.validate()?;
    let n = g.node_count();
    assert_eq!(b.len(), n, "right-hand side length must equal node count");
    if let Some(bad) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "right-hand side entry {bad} is not finite"
        )));
    }

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let inv_diag: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + g.degree(i) as f64)).collect();
    let limit = opts.iteration_limit(n);
    let target = opts.tolerance * b_norm;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut r_norm = b_norm;

    for it in 1..=limit {
        g.laplacian_plus_identity_apply_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = norm(&r);
        if r_norm <= target {
            return Ok(Solution {
                x,
                iterations: it,
                relative_residual: r_norm / b_norm,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Err(Error::NotConverged {
        iterations: limit,
        residual: r_norm / b_norm,
        row: None,
    })
}

/// Solves one system per row. Rows are independent and may be solved
/// concurrently; the result is identical to calling [`solve`] in a loop.
pub fn solve_many(g: &Graph, rows: &[Vec<f64>], opts: &SolveOptions) -> Result<Vec<Vec<f64>>> {
    opts.validate()?;
    try_map_range(opts.execution, rows.len(), |i| {
        solve(g, &rows[i], opts).map_err(|e| e.at_row(i))
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn tight() -> SolveOptions {
        SolveOptions::with_tolerance(1e-10)
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn two_node_path() {
        let x = solve(&path(2), &[1.0, 0.0], &tight()).unwrap();
        assert_close(&x, &[2.0 / 3.0, 1.0 / 3.0], 1e-9);
    }

    #[test]
    fn three_node_path() {
        let x = solve(&path(3), &[1.0, 0.0, 0.0], &tight()).unwrap();
        assert_close(&x, &[5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0], 1e-9);
    }

    #[test]
    fn all_ones_is_a_fixed_point() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (1, 4)]).unwrap();
        let x = solve(&g, &[1.0; 5], &tight()).unwrap();
        assert_close(&x, &[1.0; 5], 1e-9);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let s = solve_detailed(&path(4), &[0.0; 4], &tight()).unwrap();
        assert_eq!(s.x, vec![0.0; 4]);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn many_matches_loop() {
        let g = path(2);
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let xs = solve_many(&g, &rows, &tight()).unwrap();
        assert_close(&xs[0], &[2.0 / 3.0, 1.0 / 3.0], 1e-9);
        assert_close(&xs[1], &[1.0 / 3.0, 2.0 / 3.0], 1e-9);
        assert!(solve_many(&g, &[], &tight()).unwrap().is_empty());
    }

    #[test]
    fn non_convergence_reports_residual_and_row() {
        let g = path(50);
        let mut b = vec![0.0; 50];
        b[0] = 1.0;
        let opts = SolveOptions::with_tolerance(1e-14).max_iterations(1);
        match solve(&g, &b, &opts) {
            Err(Error::NotConverged {
                iterations,
                residual,
                row,
            }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 0.0);
                assert_eq!(row, None);
            }
            other => panic!("unexpected {other:?}"),
        }
        let rows = vec![vec![0.0; 50], b.clone()];
        match solve_many(&g, &rows, &opts) {
            Err(Error::NotConverged { row, .. }) => assert_eq!(row, Some(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_options_rejected() {
        let g = path(2);
        assert!(solve(&g, &[1.0, 0.0], &SolveOptions::with_tolerance(0.0)).is_err());
        assert!(solve(&g, &[1.0, 0.0], &SolveOptions::with_tolerance(1.0)).is_err());
        assert!(solve(&g, &[1.0, 0.0], &tight().max_iterations(0)).is_err());
        assert!(solve(&g, &[f64::NAN, 0.0], &tight()).is_err());
    }

    #[test]
    fn default_iteration_limit() {
        assert_eq!(SolveOptions::default().iteration_limit(100), 200);
        assert_eq!(SolveOptions::default().max_iterations(7).iteration_limit(100), 7);
    }
}

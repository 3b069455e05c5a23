//! Marginal gains of zeroing one internal opinion.
//!
//! For `f(s) = sᵀMs` with `M = Ω` (resistance) or `M = Ω²` (controversy),
//! zeroing `s_i` lowers `f` by
//!
//! ```text
//! Δ(i) = s_i · (2·(Ms)_i − s_i·M_ii)
//! ```
//!
//! `(Ms)_i` comes from one or two solves shared by all nodes. The diagonal
//! splits as `Ω_ii = ‖Ωe_i‖² + ‖BΩe_i‖²` and `(Ω²)_ii = ‖Ωe_i‖²`, and both
//! squared norms are estimated from random ±1/√p projections `PΩ` and
//! `QBΩ`, each row of which is a single Laplacian solve.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ConflictMeasure, OpinionVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linsolve::{dot, energy_to_residual_tolerance, solve, SolveOptions};
use crate::par::{map_range, try_map_range};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainEstimate {
    pub node: usize,
    pub delta: f64,
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// `M s` for the chosen measure.
pub fn apply_measure_matrix(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let q = solve(g, s.as_slice(), opts)?;
    match kind {
        ConflictMeasure::Resistance => Ok(q),
        ConflictMeasure::Controversy => solve(g, &q, opts),
    }
}

/// Exact `Δ(i)` from solves for `Ωe_i` and `Ms`.
pub fn exact_gain(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    i: usize,
    opts: &SolveOptions,
) -> Result<f64> {
    let n = g.node_count();
    assert_eq!(s.len(), n, "opinion length must equal node count");
    assert!(i < n, "node {i} out of range");
    let si = s.as_slice()[i];
    if si == 0.0 {
        return Ok(0.0);
    }
    let column = solve(g, &unit(n, i), opts)?;
    let m_ii = match kind {
        ConflictMeasure::Resistance => column[i],
        ConflictMeasure::Controversy => dot(&column, &column),
    };
    let ms = apply_measure_matrix(g, s, kind, opts)?;
    Ok(si * (2.0 * ms[i] - si * m_ii))
}

/// Diagonals of `Ω` and `Ω²`. They depend only on the graph, so exact
/// greedy computes them once and reuses them across rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestDiagonals {
    pub omega: Vec<f64>,
    pub omega_squared: Vec<f64>,
}

impl ForestDiagonals {
    /// One solve per node.
    pub fn compute(g: &Graph, opts: &SolveOptions) -> Result<Self> {
        let n = g.node_count();
        let pairs = try_map_range(opts.execution, n, |i| {
            let col = solve(g, &unit(n, i), opts).map_err(|e| e.at_row(i))?;
            Ok::<_, Error>((col[i], dot(&col, &col)))
        })?;
        let (omega, omega_squared) = pairs.into_iter().unzip();
        Ok(ForestDiagonals {
            omega,
            omega_squared,
        })
    }

    pub fn for_measure(&self, kind: ConflictMeasure) -> &[f64] {
        match kind {
            ConflictMeasure::Resistance => &self.omega,
            ConflictMeasure::Controversy => &self.omega_squared,
        }
    }
}

/// Exact gains for every node outside `exclude`, in ascending node order.
pub fn exact_gains(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    diagonals: &ForestDiagonals,
    exclude: &[usize],
    opts: &SolveOptions,
) -> Result<Vec<GainEstimate>> {
    let ms = apply_measure_matrix(g, s, kind, opts)?;
    Ok(assemble(s, exclude, |i, si| {
        si * (2.0 * ms[i] - si * diagonals.for_measure(kind)[i])
    }))
}

fn assemble<F: Fn(usize, f64) -> f64>(s: &OpinionVector, exclude: &[usize], gain: F) -> Vec<GainEstimate> {
    let mut skip = vec![false; s.len()];
    for &i in exclude {
        skip[i] = true;
    }
    s.as_slice()
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip[*i])
        .map(|(i, &si)| GainEstimate {
            node: i,
            delta: if si == 0.0 { 0.0 } else { gain(i, si) },
        })
        .collect()
}

/// Number of projection rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchDimension {
    /// `max(8, ⌈factor · ln n⌉)`.
    Heuristic { factor: f64 },
    /// `⌈24 ln n / ε²⌉`, the Johnson–Lindenstrauss bound at tolerance ε.
    JohnsonLindenstrauss,
    /// `⌈24 ln n / (ε/12)²⌉`, the bound needed for the worst-case ε
    /// guarantee on every gain.
    Theoretical,
    Fixed(usize),
}

impl Default for SketchDimension {
    fn default() -> Self {
        SketchDimension::Heuristic { factor: 4.0 }
    }
}

impl SketchDimension {
    pub fn rows(self, n: usize, epsilon: f64) -> usize {
        let ln_n = (n.max(1) as f64).ln();
        match self {
            SketchDimension::Heuristic { factor } => ((factor * ln_n).ceil() as usize).max(8),
            SketchDimension::JohnsonLindenstrauss => {
                ((24.0 * ln_n / (epsilon * epsilon)).ceil() as usize).max(1)
            }
            SketchDimension::Theoretical => {
                let e = epsilon / 12.0;
                ((24.0 * ln_n / (e * e)).ceil() as usize).max(1)
            }
            SketchDimension::Fixed(p) => p,
        }
    }
}

/// Solver accuracy used while sketching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchTolerances {
    /// Relative-residual targets for projection rows and for `q`, `h`.
    Practical { rows: f64, vectors: f64 },
    /// Worst-case accuracies that make every estimate an ε-approximation
    /// (see [`theoretical_tolerances`]). Very tight for large graphs.
    Theoretical,
}

impl Default for SketchTolerances {
    fn default() -> Self {
        SketchTolerances::Practical {
            rows: 1e-6,
            vectors: 1e-8,
        }
    }
}

/// Energy-norm accuracies `(δ_X, δ_Y, δ_q)` for the incidence sketch rows,
/// the plain sketch rows and the `q`/`h` solves.
///
/// The `|I+L|` factor in `δ_q` is taken as `1 + d_max`, the largest entry of
/// `I + L`.
pub fn theoretical_tolerances(n: usize, max_degree: usize, epsilon: f64) -> (f64, f64, f64) {
    let nf = n as f64;
    let shrink = (1.0 - epsilon / 12.0).sqrt();
    let grow = ((1.0 + epsilon / 12.0) * (nf + 1.0) * nf).sqrt();
    let incidence = epsilon * shrink * (nf - 1.0) / (32.0 * nf * nf * (nf + 1.0) * grow);
    let projection = epsilon * shrink / (32.0 * (nf + 1.0) * grow);
    let vectors = epsilon / (6.0 * (1.0 + max_degree as f64) * (nf * (1.0 + nf)).sqrt());
    (incidence, projection, vectors)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchOptions {
    pub epsilon: f64,
    pub seed: u64,
    pub dimension: SketchDimension,
    pub tolerances: SketchTolerances,
}

impl Default for SketchOptions {
    fn default() -> Self {
        SketchOptions {
            epsilon: 0.5,
            seed: 42,
            dimension: SketchDimension::default(),
            tolerances: SketchTolerances::default(),
        }
    }
}

impl SketchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1/2], got {}",
                self.epsilon
            )));
        }
        if let SketchDimension::Fixed(0) = self.dimension {
            return Err(Error::InvalidArgument("sketch dimension must be positive".into()));
        }
        if let SketchDimension::Heuristic { factor } = self.dimension {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "sketch factor must be positive, got {factor}"
                )));
            }
        }
        if let SketchTolerances::Practical { rows, vectors } = self.tolerances {
            for t in [rows, vectors] {
                if !(t > 0.0 && t < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "sketch tolerance must lie in (0, 1), got {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Residual targets `(incidence rows, projection rows, q/h)` on `g`.
    fn residual_tolerances(&self, g: &Graph) -> (f64, f64, f64) {
        match self.tolerances {
            SketchTolerances::Practical { rows, vectors } => (rows, rows, vectors),
            SketchTolerances::Theoretical => {
                let (a, b, c) = theoretical_tolerances(g.node_count(), g.max_degree(), self.epsilon);
                (
                    energy_to_residual_tolerance(g, a),
                    energy_to_residual_tolerance(g, b),
                    energy_to_residual_tolerance(g, c),
                )
            }
        }
    }
}

/// Solver outputs for one round of gain estimation. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchSet {
    p: usize,
    seed: u64,
    /// Rows of `X̃ ≈ QBΩ`; absent when only controversy gains are needed.
    incidence_rows: Option<Vec<Vec<f64>>>,
    /// Rows of `Ỹ ≈ PΩ`.
    projection_rows: Vec<Vec<f64>>,
    q: Vec<f64>,
    h: Vec<f64>,
    incidence_norms: Option<Vec<f64>>,
    projection_norms: Vec<f64>,
}

impl SketchSet {
    pub fn dimension(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Ω s`
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `Ω² s`
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn incidence_rows(&self) -> Option<&[Vec<f64>]> {
        self.incidence_rows.as_deref()
    }

    pub fn projection_rows(&self) -> &[Vec<f64>] {
        &self.projection_rows
    }

    /// `‖X̃e_i‖²` per node, estimating `‖BΩe_i‖²`.
    pub fn incidence_norms(&self) -> Option<&[f64]> {
        self.incidence_norms.as_deref()
    }

    /// `‖Ỹe_i‖²` per node, estimating `‖Ωe_i‖²`.
    pub fn projection_norms(&self) -> &[f64] {
        &self.projection_norms
    }
}

/// Rademacher row of length `len` scaled by `scale`, from its own stream.
fn sign_row(seed: u64, stream: u64, len: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(len);
    let mut bits = 0u64;
    for k in 0..len {
        if k % 64 == 0 {
            bits = rng.next_u64();
        }
        out.push(if bits & 1 == 1 { scale } else { -scale });
        bits >>= 1;
    }
    out
}

fn column_norms(rows: &[Vec<f64>], n: usize, opts: &SolveOptions) -> Vec<f64> {
    map_range(opts.execution, n, |i| rows.iter().map(|r| r[i] * r[i]).sum())
}

/// Builds both sketches plus `q = Ωs` and `h = Ω²s`.
///
/// Row `r` of `P` and `Q` is drawn from ChaCha stream `2r` and `2r + 1` of
/// `sketch.seed`, so the result is bit-identical across runs and across
/// execution modes. `QB` is formed row by row as `Bᵀ(Q_r)` without storing
/// `Q`.
pub fn build_sketches(
    g: &Graph,
    s: &OpinionVector,
    sketch: &SketchOptions,
    opts: &SolveOptions,
) -> Result<SketchSet> {
    build_sketches_for(g, s, sketch, opts, true)
}

pub(crate) fn build_sketches_for(
    g: &Graph,
    s: &OpinionVector,
    sketch: &SketchOptions,
    opts: &SolveOptions,
    with_incidence: bool,
) -> Result<SketchSet> {
    sketch.validate()?;
    opts.validate()?;
    let n = g.node_count();
    let m = g.edge_count();
    assert_eq!(s.len(), n, "opinion length must equal node count");

    let p = sketch.dimension.rows(n, sketch.epsilon);
    let scale = 1.0 / (p as f64).sqrt();
    let (tol_x, tol_y, tol_q) = sketch.residual_tolerances(g);
    let seed = sketch.seed;

    let vec_opts = opts.tolerance(tol_q);
    let q = solve(g, s.as_slice(), &vec_opts)?;
    let h = solve(g, &q, &vec_opts)?;

    let y_opts = opts.tolerance(tol_y);
    let projection_rows = try_map_range(opts.execution, p, |r| {
        let rhs = sign_row(seed, 2 * r as u64, n, scale);
        solve(g, &rhs, &y_opts).map_err(|e| e.at_row(r))
    })?;

    let incidence_rows = if with_incidence {
        let x_opts = opts.tolerance(tol_x);
        Some(try_map_range(opts.execution, p, |r| {
            let q_row = sign_row(seed, 2 * r as u64 + 1, m, scale);
            let rhs = g.incidence_transpose_apply(&q_row);
            solve(g, &rhs, &x_opts).map_err(|e| e.at_row(r))
        })?)
    } else {
        None
    };

    let projection_norms = column_norms(&projection_rows, n, opts);
    let incidence_norms = incidence_rows.as_ref().map(|rows| column_norms(rows, n, opts));

    Ok(SketchSet {
        p,
        seed,
        incidence_rows,
        projection_rows,
        q,
        h,
        incidence_norms,
        projection_norms,
    })
}

/// Estimated gains for every node outside `exclude`, in ascending order.
///
/// Nodes with `s_i = 0` get exactly zero. Negative estimates are returned
/// unchanged.
///
/// # Panics
///
/// If `kind` is resistance and `sketches` was built without the incidence
/// sketch.
pub fn estimate_gains(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    sketches: &SketchSet,
    exclude: &[usize],
) -> Vec<GainEstimate> {
    assert_eq!(s.len(), g.node_count(), "opinion length must equal node count");
    let y = &sketches.projection_norms;
    match kind {
        ConflictMeasure::Resistance => {
            let x = sketches
                .incidence_norms
                .as_ref()
                .expect("resistance gains need the incidence sketch");
            let q = &sketches.q;
            assemble(s, exclude, |i, si| si * (2.0 * q[i] - (x[i] + y[i]) * si))
        }
        ConflictMeasure::Controversy => {
            let h = &sketches.h;
            assemble(s, exclude, |i, si| si * (2.0 * h[i] - y[i] * si))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{dense_forest_matrix, measure};

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn tight() -> SolveOptions {
        SolveOptions::with_tolerance(1e-12)
    }

    #[test]
    fn exact_gain_examples() {
        let g = path(2);
        let s = OpinionVector::uniform(2, 1.0).unwrap();
        let r = exact_gain(&g, &s, ConflictMeasure::Resistance, 0, &tight()).unwrap();
        assert!((r - 4.0 / 3.0).abs() <= 1e-9);
        let c = exact_gain(&g, &s, ConflictMeasure::Controversy, 0, &tight()).unwrap();
        assert!((c - 13.0 / 9.0).abs() <= 1e-9);

        let s = OpinionVector::new(vec![0.0, 0.7]).unwrap();
        for kind in [ConflictMeasure::Resistance, ConflictMeasure::Controversy] {
            assert_eq!(exact_gain(&g, &s, kind, 0, &tight()).unwrap(), 0.0);
        }
    }

    #[test]
    fn exact_gain_is_a_measure_difference() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 3), (2, 5)]).unwrap();
        let s = OpinionVector::new(vec![0.1, 0.9, 0.4, 0.6, 1.0, 0.3]).unwrap();
        for kind in [ConflictMeasure::Resistance, ConflictMeasure::Controversy] {
            let before = measure(&g, &s, kind, &tight()).unwrap();
            for i in 0..6 {
                let after = measure(&g, &s.with_zeroed(&[i]), kind, &tight()).unwrap();
                let gain = exact_gain(&g, &s, kind, i, &tight()).unwrap();
                assert!((gain - (before - after)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn diagonals_match_dense_oracle() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let om = dense_forest_matrix(&g).unwrap();
        let om2 = &om * &om;
        let d = ForestDiagonals::compute(&g, &tight()).unwrap();
        for i in 0..5 {
            assert!((d.omega[i] - om[(i, i)]).abs() <= 1e-10);
            assert!((d.omega_squared[i] - om2[(i, i)]).abs() <= 1e-10);
        }
    }

    #[test]
    fn sketch_q_contract_and_determinism() {
        let g = path(2);
        let s = OpinionVector::new(vec![1.0, 0.0]).unwrap();
        let opts = SketchOptions::default();
        let a = build_sketches(&g, &s, &opts, &SolveOptions::default()).unwrap();
        assert!((a.q()[0] - 2.0 / 3.0).abs() <= 1e-8);
        assert!((a.q()[1] - 1.0 / 3.0).abs() <= 1e-8);
        let b = build_sketches(&g, &s, &opts, &SolveOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dimension(), 8);
    }

    #[test]
    fn sequential_and_parallel_sketches_agree() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        let s = OpinionVector::new(vec![0.5, 0.2, 0.9, 0.1, 0.0, 1.0]).unwrap();
        let seq = SolveOptions::default().execution(crate::Execution::Sequential);
        let par = SolveOptions::default().execution(crate::Execution::Parallel);
        let opts = SketchOptions::default();
        assert_eq!(
            build_sketches(&g, &s, &opts, &seq).unwrap(),
            build_sketches(&g, &s, &opts, &par).unwrap()
        );
    }

    #[test]
    fn different_seeds_give_different_sketches() {
        let g = path(4);
        let s = OpinionVector::uniform(4, 1.0).unwrap();
        let a = build_sketches(&g, &s, &SketchOptions { seed: 1, ..Default::default() }, &tight()).unwrap();
        let b = build_sketches(&g, &s, &SketchOptions { seed: 2, ..Default::default() }, &tight()).unwrap();
        assert_ne!(a.projection_rows(), b.projection_rows());
    }

    #[test]
    fn estimates_zero_for_zero_opinions_and_respect_exclude() {
        let g = path(4);
        let s = OpinionVector::new(vec![0.0, 1.0, 0.0, 0.5]).unwrap();
        let sk = build_sketches(&g, &s, &SketchOptions::default(), &tight()).unwrap();
        for kind in [ConflictMeasure::Resistance, ConflictMeasure::Controversy] {
            let est = estimate_gains(&g, &s, kind, &sk, &[]);
            assert_eq!(est.len(), 4);
            assert_eq!(est[0].delta, 0.0);
            assert_eq!(est[2].delta, 0.0);
            assert!(estimate_gains(&g, &s, kind, &sk, &[0, 1, 2, 3]).is_empty());
            let partial = estimate_gains(&g, &s, kind, &sk, &[1]);
            assert_eq!(partial.iter().map(|e| e.node).collect::<Vec<_>>(), vec![0, 2, 3]);
        }
    }

    #[test]
    fn two_node_estimate_with_large_sketch() {
        let g = path(2);
        let s = OpinionVector::uniform(2, 1.0).unwrap();
        let opts = SketchOptions {
            dimension: SketchDimension::Fixed(4000),
            tolerances: SketchTolerances::Practical { rows: 1e-12, vectors: 1e-12 },
            ..Default::default()
        };
        let sk = build_sketches(&g, &s, &opts, &tight()).unwrap();
        let est = estimate_gains(&g, &s, ConflictMeasure::Resistance, &sk, &[]);
        assert!((est[0].delta - 4.0 / 3.0).abs() <= 0.5 * 4.0 / 3.0);
        assert!((est[0].delta - 4.0 / 3.0).abs() <= 0.05);
    }

    #[test]
    fn dimension_rules() {
        assert_eq!(SketchDimension::default().rows(2, 0.5), 8);
        assert_eq!(SketchDimension::default().rows(100_000, 0.5), 47);
        assert_eq!(SketchDimension::JohnsonLindenstrauss.rows(200, 0.5), 509);
        assert_eq!(SketchDimension::Theoretical.rows(200, 0.5), 73_244);
        assert_eq!(SketchDimension::Fixed(3).rows(10, 0.5), 3);
    }

    #[test]
    fn sketch_options_validation() {
        let bad = [
            SketchOptions { epsilon: 0.0, ..Default::default() },
            SketchOptions { epsilon: 0.6, ..Default::default() },
            SketchOptions { dimension: SketchDimension::Fixed(0), ..Default::default() },
            SketchOptions {
                tolerances: SketchTolerances::Practical { rows: 2.0, vectors: 1e-8 },
                ..Default::default()
            },
        ];
        for opts in bad {
            assert!(opts.validate().is_err(), "{opts:?}");
        }
        assert!(SketchOptions::default().validate().is_ok());
    }

    #[test]
    fn theoretical_tolerances_shrink_with_n() {
        let (a1, b1, c1) = theoretical_tolerances(100, 5, 0.5);
        let (a2, b2, c2) = theoretical_tolerances(1000, 5, 0.5);
        assert!(a2 < a1 && b2 < b1 && c2 < c1);
        assert!(a1 < b1);
    }
}

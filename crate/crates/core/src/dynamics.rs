//! Friedkin–Johnsen equilibrium and the two conflict measures.
//!
//! With internal opinions `s`, expressed opinions converge to
//! `z = Ω s` where `Ω = (I + L)⁻¹` is the forest matrix. Resistance is
//! `sᵀz = sᵀΩs` and controversy is `zᵀz = sᵀΩ²s`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linsolve::{dot, solve, SolveOptions};

/// Largest graph for which [`dense_forest_matrix`] will run by default.
pub const DEFAULT_ORACLE_CAP: usize = 500;

/// Internal opinions, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OpinionVector(Vec<f64>);

impl OpinionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidArgument(format!(
                "opinion {i} = {v} outside [0, 1]"
            )));
        }
        Ok(OpinionVector(values))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn zero_node(&mut self, i: usize) {
        self.0[i] = 0.0;
    }

    /// Copy with every node in `nodes` zeroed.
    pub fn with_zeroed(&self, nodes: &[usize]) -> Self {
        let mut out = self.clone();
        for &i in nodes {
            out.zero_node(i);
        }
        out
    }
}

impl TryFrom<Vec<f64>> for OpinionVector {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<OpinionVector> for Vec<f64> {
    fn from(s: OpinionVector) -> Self {
        s.0
    }
}

/// Equilibrium expressed opinions `z = (I+L)⁻¹ s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressedOpinions(Vec<f64>);

impl ExpressedOpinions {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictMeasure {
    /// `sᵀ(I+L)⁻¹s`
    Resistance,
    /// `sᵀ(I+L)⁻²s`
    Controversy,
}

impl ConflictMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            ConflictMeasure::Resistance => "resistance",
            ConflictMeasure::Controversy => "controversy",
        }
    }
}

impl fmt::Display for ConflictMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConflictMeasure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "resistance" => Ok(ConflictMeasure::Resistance),
            "controversy" => Ok(ConflictMeasure::Controversy),
            other => Err(Error::InvalidArgument(format!(
                "unknown measure {other:?}"
            ))),
        }
    }
}

fn check_len(g: &Graph, s: &OpinionVector) {
    assert_eq!(s.len(), g.node_count(), "opinion length must equal node count");
}

pub fn equilibrium(g: &Graph, s: &OpinionVector, opts: &SolveOptions) -> Result<ExpressedOpinions> {
    check_len(g, s);
    solve(g, s.as_slice(), opts).map(ExpressedOpinions)
}

/// One synchronous FJ update:
/// `z'_i = (s_i + Σ_{j∈N(i)} z_j) / (1 + d_i)`.
pub fn fj_step(g: &Graph, s: &OpinionVector, z: &[f64]) -> Vec<f64> {
    check_len(g, s);
    assert_eq!(z.len(), g.node_count(), "opinion length must equal node count");
    (0..g.node_count())
        .map(|i| {
            let nbrs = g.neighbors(i);
            let sum: f64 = nbrs.iter().map(|&j| z[j]).sum();
            (s.as_slice()[i] + sum) / (1.0 + nbrs.len() as f64)
        })
        .collect()
}

/// Resistance `sᵀz` or controversy `zᵀz`, both from a single solve.
pub fn measure(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    opts: &SolveOptions,
) -> Result<f64> {
    let z = equilibrium(g, s, opts)?;
    Ok(measure_from_equilibrium(s, &z, kind))
}

pub fn measure_from_equilibrium(s: &OpinionVector, z: &ExpressedOpinions, kind: ConflictMeasure) -> f64 {
    match kind {
        ConflictMeasure::Resistance => dot(s.as_slice(), z.as_slice()),
        ConflictMeasure::Controversy => dot(z.as_slice(), z.as_slice()),
    }
}

/// Measure normalized by node count. Display only.
pub fn polarization_index(value: f64, n: usize) -> f64 {
    value / n as f64
}

/// Exact `Ω = (I+L)⁻¹` by dense Cholesky factorization, for `n ≤ 500`.
pub fn dense_forest_matrix(g: &Graph) -> Result<DMatrix<f64>> {
    dense_forest_matrix_capped(g, DEFAULT_ORACLE_CAP)
}

pub fn dense_forest_matrix_capped(g: &Graph, cap: usize) -> Result<DMatrix<f64>> {
    let n = g.node_count();
    if n > cap {
        return Err(Error::OracleTooLarge { n, cap });
    }
    let mut s = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        s[(i, i)] += g.degree(i) as f64;
    }
    for &(u, w) in g.edges() {
        s[(u, w)] = -1.0;
        s[(w, u)] = -1.0;
    }
    let chol = s
        .cholesky()
        .expect("I + L is symmetric positive definite");
    Ok(chol.inverse())
}

/// `sᵀ M s` with `M = Ω` or `Ω²` taken from a dense forest matrix.
pub fn dense_measure(omega: &DMatrix<f64>, s: &OpinionVector, kind: ConflictMeasure) -> f64 {
    let sv = nalgebra::DVector::from_column_slice(s.as_slice());
    let z = omega * &sv;
    match kind {
        ConflictMeasure::Resistance => sv.dot(&z),
        ConflictMeasure::Controversy => z.dot(&z),
    }
}

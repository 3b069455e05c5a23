//! Node-selection strategies.
//!
//! `f(T)` denotes the conflict measure after zeroing the internal opinions
//! of every node in `T`. It is non-increasing and supermodular in `T`, so
//! picking the largest marginal gain `k` times is within `1 − 1/e` of the
//! best `k`-set.
//!
//! Ties are broken towards the smallest node id everywhere. Two gains are
//! treated as tied when they agree to a relative `1e-10`, which absorbs
//! solver noise between symmetric nodes.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    dense_forest_matrix, measure, ConflictMeasure, OpinionVector, DEFAULT_ORACLE_CAP,
};
use crate::error::{Error, Result};
use crate::gains::{
    build_sketches_for, estimate_gains, exact_gains, ForestDiagonals, GainEstimate,
    SketchOptions,
};
use crate::graph::Graph;
use crate::linsolve::{solve_many, SolveOptions};

/// Largest number of subsets [`brute_force`] will enumerate.
pub const BRUTE_FORCE_BUDGET: u64 = 2_000_000;

pub const DEFAULT_DAMPING: f64 = 0.85;

const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Greedy,
    GreedyAc,
    Random,
    #[serde(rename = "pagerank")]
    PageRank,
    BruteForce,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Greedy,
        Method::GreedyAc,
        Method::Random,
        Method::PageRank,
        Method::BruteForce,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::GreedyAc => "greedy-ac",
            Method::Random => "random",
            Method::PageRank => "pagerank",
            Method::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub measure: ConflictMeasure,
    pub k: usize,
    /// Selected nodes in selection order.
    pub chosen: Vec<usize>,
    /// Gain attributed to each pick: exact for `Greedy`, estimated for
    /// `GreedyAc`, the realized drop in `f` otherwise.
    pub step_gains: Vec<f64>,
    pub f_initial: f64,
    pub f_final: f64,
    pub elapsed_seconds: f64,
    /// Wall time of each selection round (greedy methods only).
    #[serde(default)]
    pub round_seconds: Vec<f64>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
}

impl SelectionResult {
    pub fn delta_f(&self) -> f64 {
        self.f_initial - self.f_final
    }
}

fn check_k(k: usize, n: usize, allow_all: bool) -> Result<()> {
    let upper_ok = if allow_all { k <= n } else { k < n };
    if k == 0 || !upper_ok {
        let bound = if allow_all { "n" } else { "n - 1" };
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {bound}] (n = {n}), got {k}"
        )));
    }
    Ok(())
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Largest gain; among near-ties the smallest node id. Expects `gains` in
/// ascending node order.
fn best_gain(gains: &[GainEstimate]) -> Option<GainEstimate> {
    let mut best: Option<GainEstimate> = None;
    for &g in gains {
        match best {
            Some(b) if g.delta <= b.delta || tied(g.delta, b.delta) => {}
            _ => best = Some(g),
        }
    }
    best
}

/// Exact greedy: each round zeroes the node with the largest `Δ(i)`.
///
/// The diagonals of `Ω` and `Ω²` are computed once with `n` independent
/// solves; each round then needs only `Ms`.
pub fn greedy_exact(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    k: usize,
    opts: &SolveOptions,
) -> Result<SelectionResult> {
    let n = g.node_count();
    check_k(k, n, false)?;
    opts.validate()?;
    let start = Instant::now();
    let f_initial = measure(g, s, kind, opts)?;
    let diagonals = ForestDiagonals::compute(g, opts)?;

    let mut current = s.clone();
    let mut chosen = Vec::with_capacity(k);
    let mut step_gains = Vec::with_capacity(k);
    let mut round_seconds = Vec::with_capacity(k);
    for _ in 0..k {
        let round = Instant::now();
        let gains = exact_gains(g, &current, kind, &diagonals, &chosen, opts)?;
        let pick = best_gain(&gains).expect("k < n leaves a candidate");
        chosen.push(pick.node);
        step_gains.push(pick.delta);
        current.zero_node(pick.node);
        round_seconds.push(round.elapsed().as_secs_f64());
    }
    let f_final = measure(g, &current, kind, opts)?;
    Ok(SelectionResult {
        method: Method::Greedy,
        measure: kind,
        k,
        chosen,
        step_gains,
        f_initial,
        f_final,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        round_seconds,
        seed: None,
        epsilon: None,
    })
}

/// Sketched greedy. Round `r` (0-based) rebuilds the sketches for the
/// current opinions with seed `sketch.seed + r`, then zeroes the node with
/// the largest estimated gain. `f_initial`/`f_final` are evaluated with
/// `opts`, independently of the sketches.
pub fn greedy_ac(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    k: usize,
    sketch: &SketchOptions,
    opts: &SolveOptions,
) -> Result<SelectionResult> {
    let n = g.node_count();
    check_k(k, n, false)?;
    sketch.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let f_initial = measure(g, s, kind, opts)?;

    let mut current = s.clone();
    let mut chosen = Vec::with_capacity(k);
    let mut step_gains = Vec::with_capacity(k);
    let mut round_seconds = Vec::with_capacity(k);
    for round in 0..k {
        let t = Instant::now();
        let round_sketch = SketchOptions {
            seed: sketch.seed.wrapping_add(round as u64),
            ..*sketch
        };
        let with_incidence = kind == ConflictMeasure::Resistance;
        let sketches = build_sketches_for(g, &current, &round_sketch, opts, with_incidence)?;
        let estimates = estimate_gains(g, &current, kind, &sketches, &chosen);
        let pick = best_gain(&estimates).expect("k < n leaves a candidate");
        chosen.push(pick.node);
        step_gains.push(pick.delta);
        current.zero_node(pick.node);
        round_seconds.push(t.elapsed().as_secs_f64());
    }
    let f_final = measure(g, &current, kind, opts)?;
    Ok(SelectionResult {
        method: Method::GreedyAc,
        measure: kind,
        k,
        chosen,
        step_gains,
        f_initial,
        f_final,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        round_seconds,
        seed: Some(sketch.seed),
        epsilon: Some(sketch.epsilon),
    })
}

fn binomial_exceeds(n: usize, k: usize, budget: u64) -> bool {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > budget as u128 {
            return true;
        }
    }
    false
}

/// Dense `M` for the measure: the exact forest matrix for small graphs,
/// column solves otherwise.
fn dense_measure_matrix(g: &Graph, kind: ConflictMeasure, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    let n = g.node_count();
    let omega = if n <= DEFAULT_ORACLE_CAP {
        dense_forest_matrix(g)?
    } else {
        let units: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        let cols = solve_many(g, &units, opts)?;
        DMatrix::from_fn(n, n, |r, c| cols[c][r])
    };
    Ok(match kind {
        ConflictMeasure::Resistance => omega,
        ConflictMeasure::Controversy => &omega * &omega,
    })
}

/// Exhaustive minimum of `f` over all `k`-subsets. Among sets whose values
/// agree to a relative `1e-10`, the lexicographically smallest wins.
pub fn brute_force(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    k: usize,
    opts: &SolveOptions,
) -> Result<SelectionResult> {
    let n = g.node_count();
    check_k(k, n, true)?;
    if binomial_exceeds(n, k, BRUTE_FORCE_BUDGET) {
        return Err(Error::BudgetExceeded {
            n,
            k,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let start = Instant::now();
    let m = dense_measure_matrix(g, kind, opts)?;
    let sv = s.as_slice();
    let ms: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * sv[j]).sum()).collect();
    let f0: f64 = sv.iter().zip(&ms).map(|(a, b)| a * b).sum();

    // f(T) = f0 − 2 Σ_{i∈T} s_i (Ms)_i + Σ_{i,j∈T} s_i s_j M_ij
    let value = |set: &[usize]| -> f64 {
        let mut v = f0;
        for &i in set {
            v -= 2.0 * sv[i] * ms[i];
            for &j in set {
                v += sv[i] * sv[j] * m[(i, j)];
            }
        }
        v
    };

    let mut idx: Vec<usize> = (0..k).collect();
    let mut best_set = idx.clone();
    let mut best = value(&idx);
    loop {
        // next combination in lexicographic order
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
        let v = value(&idx);
        if v < best && !tied(v, best) {
            best = v;
            best_set.clone_from(&idx);
        }
    }

    let mut step_gains = Vec::with_capacity(k);
    let mut prev = f0;
    for j in 1..=k {
        let v = value(&best_set[..j]);
        step_gains.push(prev - v);
        prev = v;
    }
    Ok(SelectionResult {
        method: Method::BruteForce,
        measure: kind,
        k,
        chosen: best_set,
        step_gains,
        f_initial: f0,
        f_final: best,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        round_seconds: Vec::new(),
        seed: None,
        epsilon: None,
    })
}

/// `k` distinct nodes drawn uniformly by a seeded partial Fisher–Yates
/// shuffle. The draw for `k` is a prefix of the draw for any larger `k`.
pub fn random_nodes(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_k(k, n, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        perm.swap(i, j);
    }
    perm.truncate(k);
    Ok(perm)
}

/// PageRank of the simple random walk on `g` with uniform teleportation.
/// Iterates until the L1 change drops below `1e-10` or 200 steps.
pub fn pagerank_scores(g: &Graph, damping: f64) -> Result<Vec<f64>> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {damping}"
        )));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..200 {
        let dangling: f64 = (0..n).filter(|&i| g.degree(i) == 0).map(|i| rank[i]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (i, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = g
                .neighbors(i)
                .iter()
                .map(|&j| rank[j] / g.degree(j) as f64)
                .sum();
            *slot = base + damping * inflow;
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < 1e-10 {
            break;
        }
    }
    Ok(rank)
}

pub fn pagerank_top_k(g: &Graph, k: usize, damping: f64) -> Result<Vec<usize>> {
    check_k(k, g.node_count(), true)?;
    let scores = pagerank_scores(g, damping)?;
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(order)
}

/// Evaluates a fixed selection order: `f` before, after each pick and at
/// the end.
pub fn evaluate_selection(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    method: Method,
    chosen: Vec<usize>,
    opts: &SolveOptions,
) -> Result<SelectionResult> {
    let start = Instant::now();
    let f_initial = measure(g, s, kind, opts)?;
    let mut current = s.clone();
    let mut prev = f_initial;
    let mut step_gains = Vec::with_capacity(chosen.len());
    for &i in &chosen {
        current.zero_node(i);
        let v = measure(g, &current, kind, opts)?;
        step_gains.push(prev - v);
        prev = v;
    }
    Ok(SelectionResult {
        method,
        measure: kind,
        k: chosen.len(),
        chosen,
        step_gains,
        f_initial,
        f_final: prev,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        round_seconds: Vec::new(),
        seed: None,
        epsilon: None,
    })
}

pub fn baseline_random(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    k: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<SelectionResult> {
    let start = Instant::now();
    let chosen = random_nodes(g.node_count(), k, seed)?;
    let mut result = evaluate_selection(g, s, kind, Method::Random, chosen, opts)?;
    result.seed = Some(seed);
    result.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

pub fn baseline_pagerank(
    g: &Graph,
    s: &OpinionVector,
    kind: ConflictMeasure,
    k: usize,
    damping: f64,
    opts: &SolveOptions,
) -> Result<SelectionResult> {
    let start = Instant::now();
    let chosen = pagerank_top_k(g, k, damping)?;
    let mut result = evaluate_selection(g, s, kind, Method::PageRank, chosen, opts)?;
    result.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::dense_measure;
    use crate::gains::{SketchDimension, SketchTolerances};

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn tight() -> SolveOptions {
        SolveOptions::with_tolerance(1e-12)
    }

    const KINDS: [ConflictMeasure; 2] = [ConflictMeasure::Resistance, ConflictMeasure::Controversy];

    #[test]
    fn greedy_picks_path_center() {
        let g = path(3);
        let s = OpinionVector::uniform(3, 1.0).unwrap();
        let r = greedy_exact(&g, &s, ConflictMeasure::Resistance, 1, &tight()).unwrap();
        assert_eq!(r.chosen, vec![1]);
        assert!((r.step_gains[0] - 1.5).abs() <= 1e-9);
        assert!((r.f_initial - 3.0).abs() <= 1e-9);
        assert!((r.f_final - 1.5).abs() <= 1e-9);

        let c = greedy_exact(&g, &s, ConflictMeasure::Controversy, 1, &tight()).unwrap();
        assert_eq!(c.chosen, vec![1]);
        assert!((c.step_gains[0] - 13.0 / 8.0).abs() <= 1e-9);
    }

    #[test]
    fn greedy_picks_the_only_nonzero_opinion() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let mut v = vec![0.0; 5];
        v[3] = 0.8;
        let s = OpinionVector::new(v).unwrap();
        for kind in KINDS {
            assert_eq!(greedy_exact(&g, &s, kind, 1, &tight()).unwrap().chosen, vec![3]);
            let ac = greedy_ac(&g, &s, kind, 1, &SketchOptions::default(), &tight()).unwrap();
            assert_eq!(ac.chosen, vec![3]);
        }
    }

    #[test]
    fn greedy_ac_second_pick_is_an_endpoint() {
        let g = path(3);
        let s = OpinionVector::uniform(3, 1.0).unwrap();
        let sketch = SketchOptions {
            dimension: SketchDimension::Fixed(400),
            tolerances: SketchTolerances::Practical { rows: 1e-10, vectors: 1e-10 },
            ..Default::default()
        };
        let r = greedy_ac(&g, &s, ConflictMeasure::Resistance, 2, &sketch, &tight()).unwrap();
        assert_eq!(r.chosen[0], 1);
        assert!(r.chosen[1] == 0 || r.chosen[1] == 2);
        assert_eq!(r.round_seconds.len(), 2);
        assert!(r.f_final <= r.f_initial + 1e-9);
    }

    #[test]
    fn k_out_of_range_rejected() {
        let g = path(3);
        let s = OpinionVector::uniform(3, 1.0).unwrap();
        assert!(greedy_exact(&g, &s, ConflictMeasure::Resistance, 0, &tight()).is_err());
        assert!(greedy_exact(&g, &s, ConflictMeasure::Resistance, 3, &tight()).is_err());
        assert!(greedy_ac(&g, &s, ConflictMeasure::Resistance, 3, &SketchOptions::default(), &tight()).is_err());
        let bad_eps = SketchOptions { epsilon: 0.9, ..Default::default() };
        assert!(greedy_ac(&g, &s, ConflictMeasure::Resistance, 1, &bad_eps, &tight()).is_err());
        assert!(random_nodes(3, 4, 0).is_err());
        assert!(pagerank_top_k(&g, 0, 0.85).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let g = path(3);
        let s = OpinionVector::uniform(3, 1.0).unwrap();
        let r = brute_force(&g, &s, ConflictMeasure::Resistance, 1, &tight()).unwrap();
        assert_eq!(r.chosen, vec![1]);
        assert!((r.f_final - 1.5).abs() <= 1e-9);

        let zero = OpinionVector::uniform(3, 0.0).unwrap();
        let r = brute_force(&g, &zero, ConflictMeasure::Controversy, 2, &tight()).unwrap();
        assert_eq!(r.chosen, vec![0, 1]);
        assert_eq!(r.f_final, 0.0);
    }

    #[test]
    fn brute_force_with_one_survivor() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]).unwrap();
        let s = OpinionVector::new(vec![0.3, 0.9, 0.2, 0.8, 0.5, 0.6]).unwrap();
        let om = dense_forest_matrix(&g).unwrap();
        for kind in KINDS {
            let m = match kind {
                ConflictMeasure::Resistance => om.clone(),
                ConflictMeasure::Controversy => &om * &om,
            };
            let sv = s.as_slice();
            let survivor = (0..6)
                .min_by(|&a, &b| (sv[a] * sv[a] * m[(a, a)]).total_cmp(&(sv[b] * sv[b] * m[(b, b)])))
                .unwrap();
            let r = brute_force(&g, &s, kind, 5, &tight()).unwrap();
            let expected: Vec<usize> = (0..6).filter(|&i| i != survivor).collect();
            assert_eq!(r.chosen, expected);
            let value = dense_measure(&om, &s.with_zeroed(&r.chosen), kind);
            assert!((r.f_final - value).abs() <= 1e-12);
        }
    }

    #[test]
    fn brute_force_budget() {
        let g = path(40);
        let s = OpinionVector::uniform(40, 1.0).unwrap();
        assert!(matches!(
            brute_force(&g, &s, ConflictMeasure::Resistance, 20, &tight()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn random_is_seeded_and_prefix_stable() {
        let a = random_nodes(20, 5, 7).unwrap();
        assert_eq!(a, random_nodes(20, 5, 7).unwrap());
        assert_eq!(&random_nodes(20, 12, 7).unwrap()[..5], &a[..]);
        let mut all = random_nodes(10, 10, 3).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn random_is_uniform() {
        let mut counts = [0u32; 10];
        for seed in 0..10_000 {
            counts[random_nodes(10, 1, seed).unwrap()[0]] += 1;
        }
        // binomial(10^4, 0.1): sigma = 30
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 4.0 * 30.0, "{counts:?}");
        }
    }

    #[test]
    fn pagerank_examples() {
        let g = cycle(7);
        let scores = pagerank_scores(&g, DEFAULT_DAMPING).unwrap();
        for s in &scores {
            assert!((s - 1.0 / 7.0).abs() <= 1e-12);
        }
        assert_eq!(pagerank_top_k(&g, 3, DEFAULT_DAMPING).unwrap(), vec![0, 1, 2]);

        let p = pagerank_scores(&path(3), DEFAULT_DAMPING).unwrap();
        assert!(p[1] > p[0] && p[1] > p[2]);
        assert_eq!(pagerank_top_k(&path(3), 1, DEFAULT_DAMPING).unwrap(), vec![1]);

        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]).unwrap();
        let total: f64 = pagerank_scores(&g, 0.85).unwrap().iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        assert!(pagerank_scores(&g, 1.0).is_err());
    }

    #[test]
    fn baselines_report_drops() {
        let g = path(4);
        let s = OpinionVector::new(vec![0.5, 1.0, 0.25, 0.75]).unwrap();
        let r = baseline_random(&g, &s, ConflictMeasure::Resistance, 4, 1, &tight()).unwrap();
        assert!(r.f_final.abs() <= 1e-12);
        assert!((r.delta_f() - r.f_initial).abs() <= 1e-12);
        let total: f64 = r.step_gains.iter().sum();
        assert!((total - r.delta_f()).abs() <= 1e-12);
        let p = baseline_pagerank(&g, &s, ConflictMeasure::Controversy, 2, 0.85, &tight()).unwrap();
        assert_eq!(p.method, Method::PageRank);
        assert!(p.f_final <= p.f_initial);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("bomp".parse::<Method>().is_err());
    }
}

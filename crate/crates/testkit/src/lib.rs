//! Seeded random graphs and opinion vectors for tests and benches.
//!
//! Generators return `(n, edges)` with `u < w` and no duplicates, so the
//! result can be fed straight to `Graph::from_edges`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type EdgeList = (usize, Vec<(usize, usize)>);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn finish(n: usize, set: HashSet<(usize, usize)>) -> EdgeList {
    let mut edges: Vec<_> = set.into_iter().collect();
    edges.sort_unstable();
    (n, edges)
}

pub fn path(n: usize) -> EdgeList {
    (n, (1..n).map(|i| (i - 1, i)).collect())
}

pub fn cycle(n: usize) -> EdgeList {
    let mut edges: Vec<_> = (0..n).map(|i| canonical(i, (i + 1) % n)).collect();
    edges.sort_unstable();
    (n, edges)
}

/// Uniform random recursive tree: node `i` attaches to a uniform earlier node.
pub fn random_tree(n: usize, seed: u64) -> EdgeList {
    let mut r = rng(seed);
    (n, (1..n).map(|i| (r.random_range(0..i), i)).collect())
}

/// G(n, p) conditioned on connectivity by rejection.
pub fn erdos_renyi_connected(n: usize, p: f64, seed: u64) -> EdgeList {
    let mut r = rng(seed);
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for w in (u + 1)..n {
                if r.random_bool(p) {
                    edges.push((u, w));
                }
            }
        }
        if is_connected(n, &edges) {
            return (n, edges);
        }
    }
}

/// Random tree plus `extra` uniformly random chords. Always connected.
pub fn tree_plus_chords(n: usize, extra: usize, seed: u64) -> EdgeList {
    let (_, tree) = random_tree(n, seed);
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut set: HashSet<_> = tree.into_iter().collect();
    let max_edges = n * (n - 1) / 2;
    let target = (set.len() + extra).min(max_edges);
    while set.len() < target {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a != b {
            set.insert(canonical(a, b));
        }
    }
    finish(n, set)
}

/// Barabási–Albert preferential attachment, `attach` edges per new node,
/// seeded by a clique on `attach + 1` nodes.
pub fn barabasi_albert(n: usize, attach: usize, seed: u64) -> EdgeList {
    assert!(attach >= 1 && n > attach);
    let mut r = rng(seed);
    let mut set = HashSet::new();
    let mut ends: Vec<usize> = Vec::new();
    for u in 0..=attach {
        for w in (u + 1)..=attach {
            set.insert((u, w));
            ends.push(u);
            ends.push(w);
        }
    }
    for v in (attach + 1)..n {
        let mut targets = HashSet::new();
        while targets.len() < attach {
            targets.insert(ends[r.random_range(0..ends.len())]);
        }
        let mut targets: Vec<_> = targets.into_iter().collect();
        targets.sort_unstable();
        for t in targets {
            set.insert((t, v));
            ends.push(t);
            ends.push(v);
        }
    }
    finish(n, set)
}

/// Watts–Strogatz ring lattice (`half_degree` neighbors each side) with
/// rewiring probability `beta`; rewiring never disconnects the ring edges
/// `(i, i+1)`, so the result is connected.
pub fn watts_strogatz(n: usize, half_degree: usize, beta: f64, seed: u64) -> EdgeList {
    let mut r = rng(seed);
    let mut set = HashSet::new();
    for i in 0..n {
        set.insert(canonical(i, (i + 1) % n));
    }
    for i in 0..n {
        for j in 2..=half_degree {
            let mut w = (i + j) % n;
            if r.random_bool(beta) {
                loop {
                    let c = r.random_range(0..n);
                    if c != i && !set.contains(&canonical(i, c)) {
                        w = c;
                        break;
                    }
                }
            }
            set.insert(canonical(i, w));
        }
    }
    finish(n, set)
}

/// Sparse random graph with about `n · avg_degree / 2` edges: a random tree
/// plus uniform chords. Linear time in the edge count.
pub fn sparse_random(n: usize, avg_degree: f64, seed: u64) -> EdgeList {
    let target = ((n as f64) * avg_degree / 2.0).round() as usize;
    tree_plus_chords(n, target.saturating_sub(n - 1), seed)
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, w) in edges {
        adj[u].push(w);
        adj[w].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

pub fn uniform_opinions(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random::<f64>()).collect()
}

/// Random subset of `0..n` of size `k`, ascending.
pub fn random_subset(n: usize, k: usize, r: &mut impl Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(r);
    all.truncate(k);
    all.sort_unstable();
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid(n: usize, edges: &[(usize, usize)]) {
        let set: HashSet<_> = edges.iter().copied().collect();
        assert_eq!(set.len(), edges.len());
        assert!(edges.iter().all(|&(u, w)| u < w && w < n));
        assert!(is_connected(n, edges));
    }

    #[test]
    fn generators_produce_simple_connected_graphs() {
        for seed in 0..5 {
            let (n, e) = random_tree(30, seed);
            valid(n, &e);
            let (n, e) = erdos_renyi_connected(30, 0.2, seed);
            valid(n, &e);
            let (n, e) = tree_plus_chords(30, 40, seed);
            valid(n, &e);
            assert_eq!(e.len(), 29 + 40);
            let (n, e) = barabasi_albert(100, 3, seed);
            valid(n, &e);
            let (n, e) = watts_strogatz(100, 3, 0.1, seed);
            valid(n, &e);
        }
        let (n, e) = cycle(5);
        valid(n, &e);
        assert_eq!(path(4).1, vec![(0, 1), (1, 2), (2, 3)]);
    }
}

//! Immutable undirected graphs in compressed adjacency form.
//!
//! Node ids are contiguous `0..n`. Each undirected edge is stored once as
//! `(u, w)` with `u < w`; that orientation defines the signed incidence
//! matrix `B` (row `e` is `e_u − e_w`), so `L = BᵀB`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph on nodes `0..n` from an edge list.
    ///
    /// Self-loops, out-of-range endpoints and repeated edges (in either
    /// orientation) are rejected. Connectivity is not required here; use
    /// [`Graph::largest_component`] to restrict to one component.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut seen = HashSet::new();
        let mut canonical = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            canonical.push(e);
        }
        canonical.sort_unstable();
        Ok(Self::from_canonical(n, canonical))
    }

    /// `edges` must be sorted, deduplicated and satisfy `u < w < n`.
    fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, w) in &edges {
            degree[u] += 1;
            degree[w] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; 2 * edges.len()];
        for &(u, w) in &edges {
            neighbors[cursor[u]] = w;
            cursor[u] += 1;
            neighbors[cursor[w]] = u;
            cursor[w] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Graph {
            offsets,
            neighbors,
            edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count())
            .map(|i| self.degree(i))
            .max()
            .unwrap_or(0)
    }

    /// Neighbors of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Edges as `(u, w)` with `u < w`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Computes `(I + L) v`.
    pub fn laplacian_plus_identity_apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.laplacian_plus_identity_apply_into(v, &mut out);
        out
    }

    /// Writes `(I + L) v` into `out`.
    pub fn laplacian_plus_identity_apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.node_count();
        assert_eq!(v.len(), n, "vector length must equal node count");
        assert_eq!(out.len(), n, "output length must equal node count");
        for (i, o) in out.iter_mut().enumerate() {
            let nbrs = self.neighbors(i);
            let sum: f64 = nbrs.iter().map(|&j| v[j]).sum();
            *o = (1.0 + nbrs.len() as f64) * v[i] - sum;
        }
    }

    /// Computes `B v`: one entry `v_u − v_w` per edge `(u, w)`.
    pub fn incidence_apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.node_count(), "vector length must equal node count");
        self.edges.iter().map(|&(u, w)| v[u] - v[w]).collect()
    }

    /// Computes `Bᵀ x` for an edge-indexed vector `x`.
    pub fn incidence_transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.edge_count(), "vector length must equal edge count");
        let mut out = vec![0.0; self.node_count()];
        for (&(u, w), &xe) in self.edges.iter().zip(x) {
            out[u] += xe;
            out[w] -= xe;
        }
        out
    }

    /// `vᵀ L v` summed edge by edge.
    pub fn laplacian_quadratic_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.node_count(), "vector length must equal node count");
        self.edges
            .iter()
            .map(|&(u, w)| (v[u] - v[w]).powi(2))
            .sum()
    }

    /// Connected components, each listed in ascending node order. Components
    /// are ordered by their smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut comps = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![start];
            label[start] = id;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbors(u) {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Restricts the graph to its largest component.
    ///
    /// Returns the induced subgraph and, for each of its nodes, the node id
    /// it had in `self`. Relative node order is preserved. Among components
    /// of equal size the one containing the smallest node id wins.
    pub fn largest_component(&self) -> (Graph, Vec<usize>) {
        let comps = self.components();
        let mut best: &[usize] = &[];
        for c in &comps {
            if c.len() > best.len() {
                best = c;
            }
        }
        let kept = best.to_vec();
        let mut new_id = vec![usize::MAX; self.node_count()];
        for (k, &old) in kept.iter().enumerate() {
            new_id[old] = k;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, _)| new_id[u] != usize::MAX)
            .map(|&(u, w)| (new_id[u], new_id[w]))
            .collect();
        // Relabelling is monotone, so `edges` stays sorted with u < w.
        (Self::from_canonical(kept.len(), edges), kept)
    }
}

/// Bijection between the ids found in an edge-list file and contiguous ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeIdMap {
    originals: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl NodeIdMap {
    fn from_originals(originals: Vec<u64>) -> Self {
        let index = originals
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, i))
            .collect();
        NodeIdMap { originals, index }
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn to_original(&self, id: usize) -> u64 {
        self.originals[id]
    }

    pub fn to_contiguous(&self, original: u64) -> Option<usize> {
        self.index.get(&original).copied()
    }

    /// Original ids indexed by contiguous id.
    pub fn originals(&self) -> &[u64] {
        &self.originals
    }
}

/// Reads a whitespace-separated edge list and returns its largest component.
///
/// Lines starting with `#` or `%` are comments. Self-loops and repeated
/// edges are dropped; a third column is an error since only unweighted
/// graphs are supported. Surviving ids are numbered in first-seen order.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, NodeIdMap)> {
    let file = File::open(path)?;
    parse_edge_list(BufReader::new(file))
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(Graph, NodeIdMap)> {
    let mut first_seen: Vec<u64> = Vec::new();
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut edge_set: HashSet<(usize, usize)> = HashSet::new();

    let mut intern = |raw: u64, first_seen: &mut Vec<u64>| -> usize {
        *ids.entry(raw).or_insert_with(|| {
            first_seen.push(raw);
            first_seen.len() - 1
        })
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_number = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let (a, b) = match tokens.as_slice() {
            [a, b] => (*a, *b),
            [_] => {
                return Err(Error::Parse {
                    line: line_number,
                    message: "expected two node ids".into(),
                })
            }
            _ => {
                return Err(Error::Parse {
                    line: line_number,
                    message: format!(
                        "expected two node ids, found {} columns (weighted graphs are not supported)",
                        tokens.len()
                    ),
                })
            }
        };
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: line_number,
                message: format!("invalid node id {tok:?}"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        let u = intern(a, &mut first_seen);
        let w = intern(b, &mut first_seen);
        if u != w {
            edge_set.insert((u.min(w), u.max(w)));
        }
    }

    if edge_set.is_empty() {
        return Err(Error::NoUsableEdges);
    }
    let mut edges: Vec<_> = edge_set.into_iter().collect();
    edges.sort_unstable();
    let full = Graph::from_canonical(first_seen.len(), edges);
    let (lcc, kept) = full.largest_component();
    let map = NodeIdMap::from_originals(kept.iter().map(|&i| first_seen[i]).collect());
    Ok((lcc, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<(Graph, NodeIdMap)> {
        parse_edge_list(text.as_bytes())
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn keeps_largest_component() {
        let (g, map) = parse("0 1\n1 2\n3 4").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert_eq!(map.originals(), &[0, 1, 2]);
    }

    #[test]
    fn drops_duplicates_and_self_loops() {
        let (g, _) = parse("0 1\n1 0\n0 0").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn remaps_in_first_seen_order() {
        let (g, map) = parse("# comment\n5 9\n9 7").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert_eq!(map.originals(), &[5, 9, 7]);
        assert_eq!(map.to_contiguous(7), Some(2));
        assert_eq!(map.to_original(1), 9);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn equal_components_prefer_first_seen() {
        let (_, map) = parse("% konect header\n10 11\n3 4\n").unwrap();
        assert_eq!(map.originals(), &[10, 11]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        match parse("0 1\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1 0.5\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("weighted"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("# nothing\n3 3\n"), Err(Error::NoUsableEdges)));
        assert!(matches!(parse(""), Err(Error::NoUsableEdges)));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(2, [(0, 0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn laplacian_apply_examples() {
        assert_eq!(path(2).laplacian_plus_identity_apply(&[1.0, 0.0]), vec![2.0, -1.0]);
        assert_eq!(
            path(3).laplacian_plus_identity_apply(&[1.0, 2.0, 3.0]),
            vec![0.0, 2.0, 4.0]
        );
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (2, 3)]).unwrap();
        assert_eq!(g.laplacian_plus_identity_apply(&[1.0; 4]), vec![1.0; 4]);
    }

    #[test]
    fn laplacian_apply_matches_dense_product() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let mut dense = vec![vec![0.0; 5]; 5];
        for (i, row) in dense.iter_mut().enumerate() {
            row[i] = 1.0 + g.degree(i) as f64;
        }
        for &(u, w) in g.edges() {
            dense[u][w] = -1.0;
            dense[w][u] = -1.0;
        }
        let v = [0.3, -1.2, 2.5, 0.0, 4.0];
        let expected: Vec<f64> = dense
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        for (a, b) in g.laplacian_plus_identity_apply(&v).iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn incidence_apply_examples() {
        assert_eq!(path(2).incidence_apply(&[1.0, 0.0]), vec![1.0]);
        assert_eq!(path(3).incidence_apply(&[3.0, 1.0, 2.0]), vec![2.0, -1.0]);
        assert_eq!(path(4).incidence_apply(&[1.0; 4]), vec![0.0; 3]);
    }

    #[test]
    #[should_panic(expected = "node count")]
    fn length_mismatch_is_a_contract_violation() {
        path(3).laplacian_plus_identity_apply(&[1.0, 2.0]);
    }

    #[test]
    fn degrees_sum_to_twice_edges() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)]).unwrap();
        let total: usize = (0..6).map(|i| g.degree(i)).sum();
        assert_eq!(total, 2 * g.edge_count());
        assert_eq!(g.components().len(), 2);
        let (lcc, kept) = g.largest_component();
        assert_eq!(kept, vec![0, 1, 2]);
        assert!(lcc.is_connected());
    }
}

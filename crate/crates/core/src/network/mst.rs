use serde::{Deserialize, Serialize};

use super::correlation::DistMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Smaller node index.
    pub a: usize,
    /// Larger node index.
    pub b: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        Self { a: u.min(v), b: u.max(v), weight }
    }
}

/// A spanning tree over stock nodes with distance-weighted edges.
#[derive(Debug, Clone, PartialEq)]
pub struct MstGraph {
    tickers: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl MstGraph {
    /// Builds a tree from an explicit edge list, rejecting anything that is not
    /// a spanning tree of `tickers`.
    pub fn from_edges(tickers: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = tickers.len();
        if n < 2 {
            return Err(Error::TrivialGraph(n));
        }
        if edges.len() != n - 1 {
            return Err(Error::Validation(format!("tree on {n} nodes needs {} edges, got {}", n - 1, edges.len())));
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            if e.b >= n || e.a == e.b || !e.weight.is_finite() {
                return Err(Error::Validation(format!("invalid edge {e:?}")));
            }
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
        }
        let graph = Self { tickers, edges, adjacency };
        // n - 1 edges plus connectivity rules out cycles.
        let reached = graph.bfs_order(0).len();
        if reached != n {
            return Err(Error::Validation(format!("edges leave {} of {n} nodes unreachable", n - reached)));
        }
        Ok(graph)
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn index_of(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    /// Nodes in breadth-first order from `root`, with each node's parent.
    pub(crate) fn bfs_order(&self, root: usize) -> Vec<(usize, Option<usize>)> {
        let mut seen = vec![false; self.len()];
        let mut order = vec![(root, None)];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let (v, _) = order[head];
            head += 1;
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    order.push((w, Some(v)));
                }
            }
        }
        order
    }
}

/// Prim's algorithm on the dense distance matrix, growing from node 0.
///
/// Ties on distance go to the lexicographically smaller `(i, j)` node pair; with
/// tickers sorted this is the smaller ticker pair.
pub fn build_mst(dist: &DistMatrix) -> Result<MstGraph> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::TrivialGraph(n));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !dist.get(i, j).is_finite() {
                return Err(Error::Validation(format!("distance ({i}, {j}) is not finite")));
            }
        }
    }
    let pair = |u: usize, v: usize| (u.min(v), u.max(v));

    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    in_tree[0] = true;
    for (v, k) in key.iter_mut().enumerate().skip(1) {
        *k = dist.get(0, v);
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            best = match best {
                None => Some(v),
                Some(b) => {
                    let better = key[v] < key[b] || (key[v] == key[b] && pair(parent[v], v) < pair(parent[b], b));
                    Some(if better { v } else { b })
                }
            };
        }
        let v = best.expect("a node remains outside the tree");
        in_tree[v] = true;
        edges.push(Edge::new(parent[v], v, key[v]));
        for w in 0..n {
            if in_tree[w] {
                continue;
            }
            let d = dist.get(v, w);
            if d < key[w] || (d == key[w] && pair(v, w) < pair(parent[w], w)) {
                key[w] = d;
                parent[w] = v;
            }
        }
    }
    MstGraph::from_edges(dist.tickers().to_vec(), edges)
}

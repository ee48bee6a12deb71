#![allow(dead_code)]

use chrono::NaiveDate;
use mstfolio::ingest::ReturnPanel;
use mstfolio::network::{DistMatrix, Edge, MstGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tickers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("T{i:03}")).collect()
}

/// Symmetric matrix of uniform distances in (0, 2), zero diagonal.
pub fn random_dist(n: usize, rng: &mut ChaCha8Rng) -> DistMatrix {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.random_range(0.01..2.0);
            v[i * n + j] = d;
            v[j * n + i] = d;
        }
    }
    DistMatrix::from_values(tickers(n), v).unwrap()
}

/// Tree grown by attaching each new node to a uniformly chosen earlier one.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> MstGraph {
    let edges = (1..n).map(|v| Edge::new(rng.random_range(0..v), v, rng.random_range(0.05..2.0))).collect();
    MstGraph::from_edges(tickers(n), edges).unwrap()
}

/// Edges of the labeled tree encoded by a Prüfer sequence.
pub fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Minimum total weight over all n^(n-2) labeled spanning trees.
pub fn brute_force_min_weight(d: &DistMatrix) -> f64 {
    let n = d.len();
    if n == 2 {
        return d.get(0, 1);
    }
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; n - 2];
    loop {
        let w: f64 = prufer_edges(&seq, n).iter().map(|&(a, b)| d.get(a, b)).sum();
        best = best.min(w);
        let mut k = 0;
        loop {
            if k == seq.len() {
                return best;
            }
            seq[k] += 1;
            if seq[k] < n {
                break;
            }
            seq[k] = 0;
            k += 1;
        }
    }
}

/// Gaussian returns with a shared factor of the given loading.
pub fn gaussian_panel(n_stocks: usize, n_days: usize, loading: f64, seed: u64) -> ReturnPanel {
    let mut r = rng(seed);
    let mut rows = vec![vec![0.0; n_days]; n_stocks];
    for t in 0..n_days {
        let m: f64 = StandardNormal.sample(&mut r);
        for row in rows.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut r);
            row[t] = 0.01 * (loading * m + (1.0 - loading * loading).sqrt() * e);
        }
    }
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let dates = (1..=n_days).map(|i| start + chrono::Days::new(i as u64)).collect();
    ReturnPanel::new(tickers(n_stocks), start, dates, rows).unwrap()
}

/// Tree-path distance between every pair, by walking from each source.
pub fn all_pairs_paths(tree: &MstGraph) -> Vec<Vec<(f64, Vec<usize>)>> {
    let n = tree.len();
    (0..n)
        .map(|s| {
            let mut out = vec![(0.0, Vec::new()); n];
            let mut seen = vec![false; n];
            let mut stack = vec![(s, 0.0, vec![s])];
            while let Some((v, d, path)) = stack.pop() {
                seen[v] = true;
                out[v] = (d, path.clone());
                for &(w, wt) in tree.neighbors(v) {
                    if !seen[w] {
                        let mut p = path.clone();
                        p.push(w);
                        stack.push((w, d + wt, p));
                    }
                }
            }
            out
        })
        .collect()
}

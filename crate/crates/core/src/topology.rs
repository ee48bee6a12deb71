//! Node-level topology of a spanning tree and power-law fits of its metric
//! distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{CorrMatrix, MstGraph};

/// How the central node is chosen for the distance-based parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterCriterion {
    /// Largest degree.
    Degree,
    /// Largest sum of correlations with tree neighbours.
    Correlation,
    /// Smallest mean tree-path distance to every other node.
    Distance,
}

/// Path length measure used by the mean-distance center criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLength {
    /// Sum of edge distances along the tree path.
    #[default]
    Weighted,
    /// Number of edges along the tree path.
    Hops,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub tickers: Vec<String>,
    pub degree: Vec<usize>,
    pub betweenness: Vec<u64>,
    pub d_degree: Vec<f64>,
    pub d_correlation: Vec<f64>,
    pub d_distance: Vec<f64>,
    pub center_degree: String,
    pub center_correlation: String,
    pub center_distance: String,
}

impl NodeMetrics {
    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }
}

pub fn degree(tree: &MstGraph) -> Vec<usize> {
    (0..tree.len()).map(|v| tree.degree(v)).collect()
}

/// Betweenness of every node: the number of unordered node pairs, excluding
/// the node itself, whose tree path runs through it.
///
/// Removing `v` splits the tree into components of sizes `s_1..s_k`; every pair
/// drawn from two different components routes through `v`, so
/// `C(v) = sum_{a<b} s_a s_b = ((n-1)^2 - sum s_a^2) / 2`.
pub fn betweenness(tree: &MstGraph) -> Vec<u64> {
    let n = tree.len();
    let order = tree.bfs_order(0);
    let mut subtree = vec![1u64; n];
    for &(v, parent) in order.iter().rev() {
        if let Some(p) = parent {
            subtree[p] += subtree[v];
        }
    }
    let mut parent_of = vec![None; n];
    for &(v, p) in &order {
        parent_of[v] = p;
    }
    let total = n as u64;
    (0..n)
        .map(|v| {
            let mut squares = 0u64;
            for &(w, _) in tree.neighbors(v) {
                let size = if parent_of[v] == Some(w) { total - subtree[v] } else { subtree[w] };
                squares += size * size;
            }
            ((total - 1) * (total - 1) - squares) / 2
        })
        .collect()
}

/// Tree-path length from `source` to every node.
fn path_lengths(tree: &MstGraph, source: usize, mode: PathLength) -> Vec<f64> {
    let mut dist = vec![0.0; tree.len()];
    for (v, parent) in tree.bfs_order(source) {
        if let Some(p) = parent {
            let w = tree.neighbors(v).iter().find(|(u, _)| *u == p).map(|(_, w)| *w).unwrap_or(0.0);
            dist[v] = dist[p]
                + match mode {
                    PathLength::Weighted => w,
                    PathLength::Hops => 1.0,
                };
        }
    }
    dist
}

/// Weighted tree-path distance from `center` to every node.
pub fn node_distances(tree: &MstGraph, center: &str) -> Result<Vec<f64>> {
    let c = tree.index_of(center).ok_or_else(|| Error::UnknownTicker(center.to_string()))?;
    Ok(path_lengths(tree, c, PathLength::Weighted))
}

/// Index of the best-scoring node; ties go to the smaller ticker.
fn best_by<F>(tree: &MstGraph, mut better: F) -> usize
where
    F: FnMut(usize, usize) -> std::cmp::Ordering,
{
    let mut best = 0;
    for v in 1..tree.len() {
        match better(v, best) {
            std::cmp::Ordering::Greater => best = v,
            std::cmp::Ordering::Equal if tree.tickers()[v] < tree.tickers()[best] => best = v,
            _ => {}
        }
    }
    best
}

pub fn central_node(tree: &MstGraph, corr: &CorrMatrix, criterion: CenterCriterion) -> Result<String> {
    central_node_with(tree, corr, criterion, PathLength::Weighted)
}

pub fn central_node_with(
    tree: &MstGraph,
    corr: &CorrMatrix,
    criterion: CenterCriterion,
    path: PathLength,
) -> Result<String> {
    if corr.tickers() != tree.tickers() {
        return Err(Error::InvalidArgument("correlation matrix tickers differ from tree tickers".into()));
    }
    let idx = match criterion {
        CenterCriterion::Degree => best_by(tree, |a, b| tree.degree(a).cmp(&tree.degree(b))),
        CenterCriterion::Correlation => {
            let strength: Vec<f64> =
                (0..tree.len()).map(|v| tree.neighbors(v).iter().map(|&(w, _)| corr.get(v, w)).sum()).collect();
            best_by(tree, |a, b| strength[a].total_cmp(&strength[b]))
        }
        CenterCriterion::Distance => {
            // All sources share the denominator n - 1, so the summed length ranks identically.
            let total: Vec<f64> = (0..tree.len()).map(|v| path_lengths(tree, v, path).iter().sum()).collect();
            best_by(tree, |a, b| total[b].total_cmp(&total[a]))
        }
    };
    Ok(tree.tickers()[idx].clone())
}

pub fn node_metrics(tree: &MstGraph, corr: &CorrMatrix) -> Result<NodeMetrics> {
    node_metrics_with(tree, corr, PathLength::Weighted)
}

/// Computes every per-node parameter of one window's tree.
pub fn node_metrics_with(tree: &MstGraph, corr: &CorrMatrix, path: PathLength) -> Result<NodeMetrics> {
    let center_degree = central_node_with(tree, corr, CenterCriterion::Degree, path)?;
    let center_correlation = central_node_with(tree, corr, CenterCriterion::Correlation, path)?;
    let center_distance = central_node_with(tree, corr, CenterCriterion::Distance, path)?;
    Ok(NodeMetrics {
        tickers: tree.tickers().to_vec(),
        degree: degree(tree),
        betweenness: betweenness(tree),
        d_degree: node_distances(tree, &center_degree)?,
        d_correlation: node_distances(tree, &center_correlation)?,
        d_distance: node_distances(tree, &center_distance)?,
        center_degree,
        center_correlation,
        center_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: f64,
    pub samples: usize,
}

/// Continuous maximum-likelihood exponent of a power-law tail,
/// `alpha = 1 + m / sum ln(x / x_min)` over the `m` samples at or above `x_min`.
pub fn fit_power_law(samples: &[f64], x_min: f64) -> Result<PowerLawFit> {
    if !(x_min > 0.0 && x_min.is_finite()) {
        return Err(Error::InvalidArgument(format!("x_min must be positive, got {x_min}")));
    }
    let tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.is_empty() {
        return Err(Error::InsufficientData(format!("no samples at or above x_min = {x_min}")));
    }
    let log_sum: f64 = tail.iter().map(|x| (x / x_min).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::DivergentEstimate);
    }
    Ok(PowerLawFit { alpha: 1.0 + tail.len() as f64 / log_sum, x_min, samples: tail.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfBin {
    pub lower: f64,
    pub upper: f64,
    pub center: f64,
    pub count: usize,
    pub density: f64,
}

/// Histogram with logarithmically spaced bins over the positive samples,
/// normalised to a probability density.
pub fn log_binned_pdf(samples: &[f64], bins_per_decade: usize) -> Vec<PdfBin> {
    let positive: Vec<f64> = samples.iter().copied().filter(|&x| x > 0.0 && x.is_finite()).collect();
    if positive.is_empty() || bins_per_decade == 0 {
        return Vec::new();
    }
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min).log10();
    let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
    let step = 1.0 / bins_per_decade as f64;
    let nbins = (((hi - lo) / step).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; nbins];
    for x in &positive {
        let k = (((x.log10() - lo) / step).floor() as usize).min(nbins - 1);
        counts[k] += 1;
    }
    let total = positive.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let lower = 10f64.powf(lo + k as f64 * step);
            let upper = 10f64.powf(lo + (k + 1) as f64 * step);
            PdfBin {
                lower,
                upper,
                center: (lower * upper).sqrt(),
                count,
                density: count as f64 / (total * (upper - lower)),
            }
        })
        .collect()
}

//! Central, peripheral and random portfolios drawn from one window's tree metrics.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::NodeMetrics;

/// Topological parameter used to rank nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "K")]
    Degree,
    #[serde(rename = "C")]
    Betweenness,
    #[serde(rename = "D_degree")]
    DistanceDegree,
    #[serde(rename = "D_correlation")]
    DistanceCorrelation,
    #[serde(rename = "D_distance")]
    DistanceDistance,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::Degree,
        Parameter::Betweenness,
        Parameter::DistanceDegree,
        Parameter::DistanceCorrelation,
        Parameter::DistanceDistance,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Parameter::Degree => "K",
            Parameter::Betweenness => "C",
            Parameter::DistanceDegree => "D_degree",
            Parameter::DistanceCorrelation => "D_correlation",
            Parameter::DistanceDistance => "D_distance",
        }
    }

    fn is_distance(self) -> bool {
        matches!(self, Parameter::DistanceDegree | Parameter::DistanceCorrelation | Parameter::DistanceDistance)
    }

    fn distances(self, m: &NodeMetrics) -> &[f64] {
        match self {
            Parameter::DistanceDegree => &m.d_degree,
            Parameter::DistanceCorrelation => &m.d_correlation,
            _ => &m.d_distance,
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s) || p.label().replace('_', "-").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortfolioKind {
    Central,
    Peripheral,
    Random,
}

/// Equally weighted set of stocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub anchor: Option<NaiveDate>,
    pub parameter: Option<Parameter>,
    pub kind: PortfolioKind,
    /// Sorted by ticker.
    pub members: Vec<String>,
    pub weights: Vec<f64>,
    pub seed: Option<u64>,
}

impl Portfolio {
    pub fn new(parameter: Option<Parameter>, kind: PortfolioKind, mut members: Vec<String>, seed: Option<u64>) -> Self {
        members.sort();
        let w = 1.0 / members.len() as f64;
        let weights = vec![w; members.len()];
        Self { anchor: None, parameter, kind, members, weights, seed }
    }

    pub fn at(mut self, anchor: NaiveDate) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Portfolio size for a universe of `n` stocks: `floor(fraction * n)`, at least 1.
pub fn portfolio_size(n: usize, fraction: f64) -> usize {
    // The small offset keeps products like 0.29 * 100 from flooring to 28.
    ((fraction * n as f64 + 1e-9).floor() as usize).max(1).min(n)
}

fn check_fraction(fraction: f64, upper: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction <= upper) {
        return Err(Error::InvalidArgument(format!("fraction must lie in (0, {upper}], got {fraction}")));
    }
    Ok(())
}

/// Node order from most central to least central, ties by ticker.
fn centrality_order(metrics: &NodeMetrics, parameter: Parameter) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..metrics.len()).collect();
    let by_ticker = |a: &usize, b: &usize| metrics.tickers[*a].cmp(&metrics.tickers[*b]);
    match parameter {
        Parameter::Degree => {
            idx.sort_by(|a, b| metrics.degree[*b].cmp(&metrics.degree[*a]).then_with(|| by_ticker(a, b)))
        }
        Parameter::Betweenness => {
            idx.sort_by(|a, b| metrics.betweenness[*b].cmp(&metrics.betweenness[*a]).then_with(|| by_ticker(a, b)))
        }
        p => {
            let d = p.distances(metrics);
            idx.sort_by(|a, b| d[*a].total_cmp(&d[*b]).then_with(|| by_ticker(a, b)))
        }
    }
    idx
}

/// The `floor(fraction * N)` most central nodes: largest K or C, or smallest distance to the center.
pub fn select_central(metrics: &NodeMetrics, parameter: Parameter, fraction: f64) -> Result<Portfolio> {
    check_fraction(fraction, 0.5)?;
    let size = portfolio_size(metrics.len(), fraction);
    let members =
        centrality_order(metrics, parameter).into_iter().take(size).map(|i| metrics.tickers[i].clone()).collect();
    Ok(Portfolio::new(Some(parameter), PortfolioKind::Central, members, None))
}

/// Peripheral portfolio. For K and C the leaves (K = 1, equivalently C = 0) are
/// subsampled uniformly with `seed`; for the distance parameters the nodes
/// farthest from the center are taken.
pub fn select_peripheral(metrics: &NodeMetrics, parameter: Parameter, fraction: f64, seed: u64) -> Result<Portfolio> {
    check_fraction(fraction, 0.5)?;
    let size = portfolio_size(metrics.len(), fraction);
    if parameter.is_distance() {
        let d = parameter.distances(metrics);
        let mut idx: Vec<usize> = (0..metrics.len()).collect();
        idx.sort_by(|a, b| d[*b].total_cmp(&d[*a]).then_with(|| metrics.tickers[*a].cmp(&metrics.tickers[*b])));
        let members = idx.into_iter().take(size).map(|i| metrics.tickers[i].clone()).collect();
        return Ok(Portfolio::new(Some(parameter), PortfolioKind::Peripheral, members, None));
    }
    let eligible: Vec<usize> = (0..metrics.len())
        .filter(|&i| match parameter {
            Parameter::Degree => metrics.degree[i] == 1,
            _ => metrics.betweenness[i] == 0,
        })
        .collect();
    if eligible.len() < size {
        return Err(Error::SelectionInfeasible { eligible: eligible.len(), target: size });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = index::sample(&mut rng, eligible.len(), size)
        .into_iter()
        .map(|k| metrics.tickers[eligible[k]].clone())
        .collect();
    Ok(Portfolio::new(Some(parameter), PortfolioKind::Peripheral, members, Some(seed)))
}

/// Uniform sample of `floor(fraction * N)` tickers without replacement.
pub fn select_random(universe: &[String], fraction: f64, seed: u64) -> Result<Portfolio> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    if universe.is_empty() {
        return Err(Error::InvalidArgument("empty universe".into()));
    }
    let size = portfolio_size(universe.len(), fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = index::sample(&mut rng, universe.len(), size).into_iter().map(|k| universe[k].clone()).collect();
    Ok(Portfolio::new(None, PortfolioKind::Random, members, Some(seed)))
}

/// Seed for one anchor and one random stream: `base ^ anchor`, with the stream
/// tag in the high bits so distinct uses never share a generator.
pub fn derive_seed(base: u64, anchor_index: usize, stream: u32) -> u64 {
    base ^ anchor_index as u64 ^ ((stream as u64) << 40)
}

/// Ranking used by [`select_central`], exposed for comparisons that need the full order.
pub fn rank_by_centrality(metrics: &NodeMetrics, parameter: Parameter) -> Vec<String> {
    centrality_order(metrics, parameter).into_iter().map(|i| metrics.tickers[i].clone()).collect()
}

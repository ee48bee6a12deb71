use chrono::NaiveDate;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::horizon::stock_horizon_returns;
use super::BacktestConfig;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::network::{build_mst, distance_matrix, make_schedule, pearson_matrix, MstGraph, WindowSchedule};
use crate::regime::{classify, combine, ratio_amplitude, ratio_trading_days, Combination, Criterion, IndexSeries};
use crate::selection::{derive_seed, portfolio_size, select_central, select_peripheral, Parameter, Portfolio};
use crate::topology::{node_metrics_with, NodeMetrics};

/// Random stream tag for the benchmark draws; peripheral subsampling uses 1 + parameter position.
const BENCHMARK_STREAM: u32 = 0;

/// Ratios and labels of one index window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRatios {
    pub r_d: f64,
    pub r_f: Option<f64>,
}

/// Central and peripheral portfolios for one parameter, as panel stock indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSelection {
    pub parameter: Parameter,
    pub central: Portfolio,
    pub peripheral: Portfolio,
    pub central_idx: Vec<usize>,
    pub peripheral_idx: Vec<usize>,
}

/// Everything the comparisons need from one anchor.
#[derive(Debug, Clone)]
pub struct AnchorRecord {
    /// Position in the schedule.
    pub ordinal: usize,
    /// Return column closing the selection window.
    pub anchor: usize,
    pub date: NaiveDate,
    pub horizon_start: NaiveDate,
    pub horizon_end: NaiveDate,
    pub tree: MstGraph,
    pub metrics: NodeMetrics,
    pub selections: Vec<ParameterSelection>,
    /// Horizon return of every stock in the panel.
    pub stock_returns: Vec<f64>,
    /// Benchmark: mean over the random draws of each draw's equal-weight return.
    pub random_mean: f64,
    pub random_seed: u64,
    pub selection_ratios: WindowRatios,
    pub investment_ratios: WindowRatios,
    /// Combination per criterion; `None` where the window could not be labelled.
    pub combinations: Vec<(Criterion, Option<Combination>)>,
}

impl AnchorRecord {
    pub fn selection(&self, parameter: Parameter) -> &ParameterSelection {
        self.selections.iter().find(|s| s.parameter == parameter).expect("every parameter is selected")
    }

    pub fn combination(&self, criterion: Criterion) -> Option<Combination> {
        self.combinations.iter().find(|(c, _)| *c == criterion).and_then(|(_, combo)| *combo)
    }

    pub fn returns_of<'a>(&'a self, members: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
        members.iter().map(|&i| self.stock_returns[i])
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub schedule: WindowSchedule,
    pub records: Vec<AnchorRecord>,
}

fn window_ratios(index: &IndexSeries, levels: std::ops::Range<usize>) -> Result<WindowRatios> {
    let r_d = ratio_trading_days(index, levels.clone())?;
    let r_f = match ratio_amplitude(index, levels) {
        Ok(v) => Some(v),
        Err(Error::UndefinedRatio) => None,
        Err(e) => return Err(e),
    };
    Ok(WindowRatios { r_d, r_f })
}

/// Selection-side computation for one anchor: tree, metrics and portfolios.
pub fn select_at_anchor(
    returns: &ReturnPanel,
    schedule: &WindowSchedule,
    ordinal: usize,
    config: &BacktestConfig,
) -> Result<(MstGraph, NodeMetrics, Vec<ParameterSelection>)> {
    let anchor = schedule.anchors[ordinal];
    let corr = pearson_matrix(returns, schedule.selection_range(anchor))?;
    let tree = build_mst(&distance_matrix(&corr))?;
    let metrics = node_metrics_with(&tree, &corr, config.path_length)?;
    let date = returns.dates()[anchor];
    let position = |t: &String| returns.tickers().iter().position(|x| x == t).expect("member of the panel");
    let selections = Parameter::ALL
        .iter()
        .enumerate()
        .map(|(k, &parameter)| {
            let seed = derive_seed(config.base_seed, ordinal, 1 + k as u32);
            let central = select_central(&metrics, parameter, config.fraction)?.at(date);
            let peripheral = select_peripheral(&metrics, parameter, config.fraction, seed)?.at(date);
            Ok(ParameterSelection {
                parameter,
                central_idx: central.members.iter().map(position).collect(),
                peripheral_idx: peripheral.members.iter().map(position).collect(),
                central,
                peripheral,
            })
        })
        .collect::<Result<_>>()?;
    Ok((tree, metrics, selections))
}

/// Mean equal-weight return of `draws` random portfolios of `size` stocks.
pub fn random_benchmark(stock_returns: &[f64], size: usize, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..draws {
        let pick = index::sample(&mut rng, stock_returns.len(), size);
        total += pick.iter().map(|i| stock_returns[i]).sum::<f64>() / size as f64;
    }
    total / draws as f64
}

/// Runs selection, investment and regime labelling at every anchor.
///
/// Anchors are processed in parallel; the records come back in schedule order
/// and do not depend on the worker count.
pub fn run_pipeline(returns: &ReturnPanel, index: &IndexSeries, config: &BacktestConfig) -> Result<Pipeline> {
    config.validate()?;
    let price_dates = returns.price_dates();
    if index.dates() != price_dates.as_slice() {
        return Err(Error::Validation("index must be aligned to the panel's price dates".into()));
    }
    let schedule = make_schedule(price_dates.len(), config.window_days, config.step_days, config.horizon_days)?;
    let size = portfolio_size(returns.n_stocks(), config.fraction);
    let records = (0..schedule.len())
        .into_par_iter()
        .map(|ordinal| {
            let anchor = schedule.anchors[ordinal];
            let (tree, metrics, selections) = select_at_anchor(returns, &schedule, ordinal, config)?;
            let stock_returns = stock_horizon_returns(returns, anchor, config.horizon_days, config.return_mode)?;
            let random_seed = derive_seed(config.base_seed, ordinal, BENCHMARK_STREAM);
            let random_mean = random_benchmark(&stock_returns, size, config.random_draws, random_seed);

            // Level j is the close of price day j; return column t spans levels t and t + 1.
            let selection_ratios = window_ratios(index, anchor + 1 - config.window_days..anchor + 2)?;
            let investment_ratios = window_ratios(index, anchor + 1..anchor + config.horizon_days + 2)?;
            let combinations = Criterion::ALL
                .iter()
                .map(|&criterion| {
                    let cfg = config.regime.with_criterion(criterion);
                    let s = classify(selection_ratios.r_d, selection_ratios.r_f, &cfg);
                    let i = classify(investment_ratios.r_d, investment_ratios.r_f, &cfg);
                    (criterion, s.ok().zip(i.ok()).map(|(s, i)| combine(s, i)))
                })
                .collect();
            Ok(AnchorRecord {
                ordinal,
                anchor,
                date: returns.dates()[anchor],
                horizon_start: returns.dates()[anchor + 1],
                horizon_end: returns.dates()[anchor + config.horizon_days],
                tree,
                metrics,
                selections,
                stock_returns,
                random_mean,
                random_seed,
                selection_ratios,
                investment_ratios,
                combinations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pipeline { schedule, records })
}

impl Pipeline {
    /// Anchors whose investment horizon ends before `split`.
    pub fn training(&self, split: NaiveDate) -> Vec<&AnchorRecord> {
        self.records.iter().filter(|r| r.horizon_end < split).collect()
    }

    /// Anchors whose investment horizon starts on or after `split`.
    pub fn testing(&self, split: NaiveDate) -> Vec<&AnchorRecord> {
        self.records.iter().filter(|r| r.horizon_start >= split).collect()
    }

    pub fn all(&self) -> Vec<&AnchorRecord> {
        self.records.iter().collect()
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anova::{anova, sharpe};
use super::horizon::stock_horizon_returns;
use super::pipeline::{random_benchmark, select_at_anchor};
use super::BacktestConfig;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::network::make_schedule;
use crate::selection::{derive_seed, portfolio_size, Parameter, PortfolioKind};

/// Stream tags of the sweep benchmarks start here, one per candidate horizon.
const SWEEP_STREAM: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: Parameter,
    pub kind: PortfolioKind,
    /// Sharpe ratio of the per-anchor excess series, one per candidate horizon.
    pub sharpe: Vec<Option<f64>>,
    /// ANOVA across the candidate horizons; `None` when skipped or degenerate.
    pub p_value: Option<f64>,
    /// Fewer than two candidates: the test is undefined.
    pub anova_skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub horizons: Vec<usize>,
    pub anchors: usize,
    pub rows: Vec<SweepRow>,
}

/// Sharpe ratios and a cross-horizon ANOVA for central and peripheral
/// portfolios. Every candidate uses the anchors that fit the longest one.
pub fn horizon_sweep(returns: &ReturnPanel, config: &BacktestConfig, horizons: &[usize]) -> Result<SweepTable> {
    config.validate()?;
    let longest = *horizons.iter().max().ok_or_else(|| Error::InvalidArgument("no candidate horizons".into()))?;
    if horizons.contains(&0) {
        return Err(Error::InvalidArgument("candidate horizons must be positive".into()));
    }
    let schedule = make_schedule(returns.n_days() + 1, config.window_days, config.step_days, longest)?;
    let size = portfolio_size(returns.n_stocks(), config.fraction);
    let kinds = [PortfolioKind::Central, PortfolioKind::Peripheral];

    // excess[anchor][horizon][parameter * 2 + kind]
    let excess = (0..schedule.len())
        .into_par_iter()
        .map(|ordinal| {
            let anchor = schedule.anchors[ordinal];
            let (_, _, selections) = select_at_anchor(returns, &schedule, ordinal, config)?;
            horizons
                .iter()
                .enumerate()
                .map(|(h, &dt)| {
                    let stock = stock_horizon_returns(returns, anchor, dt, config.return_mode)?;
                    let seed = derive_seed(config.base_seed, ordinal, SWEEP_STREAM + h as u32);
                    let bench = random_benchmark(&stock, size, config.random_draws, seed);
                    let mean = |m: &[usize]| m.iter().map(|&i| stock[i]).sum::<f64>() / m.len() as f64;
                    Ok(selections
                        .iter()
                        .flat_map(|s| [mean(&s.central_idx) - bench, mean(&s.peripheral_idx) - bench])
                        .collect::<Vec<f64>>())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (p, &parameter) in Parameter::ALL.iter().enumerate() {
        for (k, &kind) in kinds.iter().enumerate() {
            let series: Vec<Vec<f64>> =
                (0..horizons.len()).map(|h| excess.iter().map(|a| a[h][p * 2 + k]).collect()).collect();
            let anova_skipped = horizons.len() < 2;
            let p_value = if anova_skipped {
                None
            } else {
                let groups: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
                anova(&groups).ok().map(|a| a.p_value)
            };
            rows.push(SweepRow {
                parameter,
                kind,
                sharpe: series.iter().map(|s| sharpe(s).ok()).collect(),
                p_value,
                anova_skipped,
            });
        }
    }
    Ok(SweepTable { horizons: horizons.to_vec(), anchors: schedule.len(), rows })
}

mod anova;
mod compare;
mod horizon;
mod pipeline;
mod strategy;
mod sweep;

use serde::{Deserialize, Serialize};

pub use anova::{anova, anova_oneway, sharpe, Anova};
pub use compare::{compare_regimes, comparison_table, ComparisonCell, COMPARISON_COLUMNS};
pub use horizon::{excess_return, horizon_return, stock_horizon_returns, HorizonResult, ReturnMode};
pub use pipeline::{
    random_benchmark, run_pipeline, select_at_anchor, AnchorRecord, ParameterSelection, Pipeline, WindowRatios,
};
pub use strategy::{
    evaluate_strategy, train_strategy, Choice, EmpiricalReport, HorizonPair, StrategyEntry, StrategyEvaluation,
    StrategyMap,
};
pub use sweep::{horizon_sweep, SweepRow, SweepTable};

use crate::error::{Error, Result};
use crate::regime::RegimeConfig;
use crate::topology::PathLength;

/// How per-anchor returns are pooled into ANOVA groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// One value per member stock per anchor.
    #[default]
    PerStock,
    /// One value per anchor: the portfolio's equal-weight return.
    PerAnchor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub window_days: usize,
    pub step_days: usize,
    pub horizon_days: usize,
    pub fraction: f64,
    pub regime: RegimeConfig,
    pub base_seed: u64,
    pub random_draws: usize,
    pub min_samples: usize,
    pub significance: f64,
    pub return_mode: ReturnMode,
    pub path_length: PathLength,
    pub pooling: Pooling,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            window_days: 200,
            step_days: 20,
            horizon_days: 200,
            fraction: 0.10,
            regime: RegimeConfig::default(),
            base_seed: 0,
            random_draws: 1000,
            min_samples: 11,
            significance: 0.10,
            return_mode: ReturnMode::Log,
            path_length: PathLength::Weighted,
            pooling: Pooling::PerStock,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_days < 2 || self.step_days == 0 || self.horizon_days == 0 {
            return Err(Error::InvalidArgument(format!(
                "window_days must be >= 2 and step_days, horizon_days >= 1 (got {}, {}, {})",
                self.window_days, self.step_days, self.horizon_days
            )));
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("fraction must lie in (0, 1), got {}", self.fraction)));
        }
        if self.random_draws == 0 {
            return Err(Error::InvalidArgument("random_draws must be positive".into()));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidArgument(format!("significance must lie in (0, 1), got {}", self.significance)));
        }
        RegimeConfig::new(self.regime.theta_plus, self.regime.theta_minus, self.regime.criterion)?;
        Ok(())
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::selection::Portfolio;
use crate::stats;

/// How a stock's return over a horizon is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    /// Sum of daily log returns.
    #[default]
    Log,
    /// exp(sum of daily log returns) - 1.
    Simple,
}

impl ReturnMode {
    pub fn from_log_sum(self, log_sum: f64) -> f64 {
        match self {
            ReturnMode::Log => log_sum,
            ReturnMode::Simple => log_sum.exp_m1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonResult {
    pub anchor: usize,
    pub members: Vec<String>,
    pub stock_returns: Vec<f64>,
    pub portfolio_return: f64,
}

/// Return of every stock over the return columns `anchor + 1 ..= anchor + horizon_days`.
pub fn stock_horizon_returns(
    returns: &ReturnPanel,
    anchor: usize,
    horizon_days: usize,
    mode: ReturnMode,
) -> Result<Vec<f64>> {
    let start = anchor + 1;
    let end = start + horizon_days;
    if horizon_days == 0 || end > returns.n_days() {
        return Err(Error::HorizonOutOfRange { start, end, len: returns.n_days() });
    }
    Ok(returns.returns().iter().map(|row| mode.from_log_sum(row[start..end].iter().sum())).collect())
}

/// Equal-weight portfolio return over the investment horizon after `anchor`.
pub fn horizon_return(
    portfolio: &Portfolio,
    returns: &ReturnPanel,
    anchor: usize,
    horizon_days: usize,
    mode: ReturnMode,
) -> Result<HorizonResult> {
    let all = stock_horizon_returns(returns, anchor, horizon_days, mode)?;
    let stock_returns = portfolio
        .members
        .iter()
        .map(|t| {
            returns.tickers().iter().position(|x| x == t).map(|i| all[i]).ok_or_else(|| Error::UnknownTicker(t.clone()))
        })
        .collect::<Result<Vec<f64>>>()?;
    if stock_returns.is_empty() {
        return Err(Error::InsufficientData("portfolio has no members".into()));
    }
    Ok(HorizonResult {
        anchor,
        members: portfolio.members.clone(),
        portfolio_return: stats::mean(&stock_returns),
        stock_returns,
    })
}

/// Mean of the selected group minus mean of the random group.
pub fn excess_return(selected: &[f64], random: &[f64]) -> Result<f64> {
    if selected.is_empty() || random.is_empty() {
        return Err(Error::InsufficientData("excess return needs two non-empty groups".into()));
    }
    Ok(stats::mean(selected) - stats::mean(random))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::PortfolioKind;
    use chrono::NaiveDate;

    fn panel(rows: Vec<Vec<f64>>) -> ReturnPanel {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let days = rows[0].len();
        let dates = (1..=days).map(|i| start + chrono::Days::new(i as u64)).collect();
        let tickers = (0..rows.len()).map(|i| format!("S{i}")).collect();
        ReturnPanel::new(tickers, start, dates, rows).unwrap()
    }

    fn portfolio(members: &[&str]) -> Portfolio {
        Portfolio::new(None, PortfolioKind::Random, members.iter().map(|s| s.to_string()).collect(), None)
    }

    #[test]
    fn equal_weight_mean() {
        // Horizon covers columns 1..=2.
        let p = panel(vec![vec![9.0, 0.05, 0.05], vec![9.0, 0.1, 0.2]]);
        let r = horizon_return(&portfolio(&["S0", "S1"]), &p, 0, 2, ReturnMode::Log).unwrap();
        assert!((r.stock_returns[0] - 0.1).abs() < 1e-15);
        assert!((r.stock_returns[1] - 0.3).abs() < 1e-15);
        assert!((r.portfolio_return - 0.2).abs() < 1e-15);
    }

    #[test]
    fn constant_daily_return_sums() {
        let mut row = vec![0.0];
        row.extend(std::iter::repeat_n(0.01, 200));
        let p = panel(vec![row]);
        let r = horizon_return(&portfolio(&["S0"]), &p, 0, 200, ReturnMode::Log).unwrap();
        assert!((r.portfolio_return - 2.0).abs() < 1e-12);
        let s = horizon_return(&portfolio(&["S0"]), &p, 0, 200, ReturnMode::Simple).unwrap();
        assert!((s.portfolio_return - (2.0f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn horizon_bounds() {
        let p = panel(vec![vec![0.0; 10]]);
        assert!(matches!(
            horizon_return(&portfolio(&["S0"]), &p, 5, 5, ReturnMode::Log),
            Err(Error::HorizonOutOfRange { .. })
        ));
        assert!(horizon_return(&portfolio(&["S0"]), &p, 4, 5, ReturnMode::Log).is_ok());
        assert!(matches!(horizon_return(&portfolio(&["ZZ"]), &p, 0, 2, ReturnMode::Log), Err(Error::UnknownTicker(_))));
    }

    #[test]
    fn excess_examples() {
        assert!((excess_return(&[0.05], &[0.02]).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(excess_return(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        assert!(excess_return(&[], &[0.1]).is_err());
    }
}

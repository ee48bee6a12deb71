//! Loading and cleaning daily price data, log returns and descriptive statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Daily adjusted closing prices, one row per stock and one column per date.
///
/// Missing observations (days a stock did not trade) are flagged in `missing`
/// and hold `NaN` in `prices`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
    missing: Vec<Vec<bool>>,
}

impl PricePanel {
    /// Builds a panel from complete rows, checking every invariant.
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self> {
        let missing = prices.iter().map(|row| vec![false; row.len()]).collect();
        Self::with_missing(tickers, dates, prices, missing)
    }

    pub fn with_missing(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        prices: Vec<Vec<f64>>,
        missing: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("dates must be strictly increasing".into()));
        }
        if prices.len() != tickers.len() || missing.len() != tickers.len() {
            return Err(Error::Validation(format!(
                "panel has {} tickers but {} price rows",
                tickers.len(),
                prices.len()
            )));
        }
        let unique: BTreeSet<&String> = tickers.iter().collect();
        if unique.len() != tickers.len() {
            return Err(Error::Validation("duplicate ticker in panel".into()));
        }
        for ((ticker, row), mask) in tickers.iter().zip(&prices).zip(&missing) {
            if row.len() != dates.len() || mask.len() != dates.len() {
                return Err(Error::Validation(format!(
                    "row for {ticker} has {} values, expected {}",
                    row.len(),
                    dates.len()
                )));
            }
            for (p, &gone) in row.iter().zip(mask) {
                if !gone && !(p.is_finite() && *p > 0.0) {
                    return Err(Error::Validation(format!("price for {ticker} must be positive and finite, got {p}")));
                }
            }
        }
        Ok(Self { tickers, dates, prices, missing })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn missing(&self) -> &[Vec<bool>] {
        &self.missing
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn missing_count(&self, stock: usize) -> usize {
        self.missing[stock].iter().filter(|&&m| m).count()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().flatten().any(|&m| m)
    }
}

/// Daily log returns. Column `t` holds ln P(t+1) - ln P(t) of the source panel,
/// dated at the later day.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    tickers: Vec<String>,
    start_date: NaiveDate,
    dates: Vec<NaiveDate>,
    returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn new(
        tickers: Vec<String>,
        start_date: NaiveDate,
        dates: Vec<NaiveDate>,
        returns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if returns.len() != tickers.len() {
            return Err(Error::Validation("return rows do not match tickers".into()));
        }
        if returns.iter().any(|r| r.len() != dates.len()) {
            return Err(Error::Validation("return row length does not match dates".into()));
        }
        if returns.iter().flatten().any(|r| !r.is_finite()) {
            return Err(Error::Validation("returns must be finite".into()));
        }
        Ok(Self { tickers, start_date, dates, returns })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    /// Dates of the return columns.
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Dates of the underlying price observations (one more than `dates`).
    pub fn price_dates(&self) -> Vec<NaiveDate> {
        std::iter::once(self.start_date).chain(self.dates.iter().copied()).collect()
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn row(&self, stock: usize) -> &[f64] {
        &self.returns[stock]
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }
}

/// Reads `date,ticker,adjusted_close` rows and aligns them on the union of dates.
pub fn load_prices<R: Read>(source: R) -> Result<PricePanel> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    let expected = ["date", "ticker", "adjusted_close"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| !h.eq_ignore_ascii_case(e)) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header date,ticker,adjusted_close, got {:?}",
                headers.iter().collect::<Vec<_>>()
            ),
        });
    }

    let mut observations: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut all_dates = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(&e, line)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 fields, got {}", record.len()) });
        }
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT)
            .map_err(|e| Error::Parse { line, message: format!("bad date {:?}: {e}", &record[0]) })?;
        let ticker = record[1].to_string();
        if ticker.is_empty() {
            return Err(Error::Parse { line, message: "empty ticker".into() });
        }
        let price: f64 =
            record[2].parse().map_err(|_| Error::Parse { line, message: format!("bad price {:?}", &record[2]) })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::Validation(format!(
                "line {line}: price for {ticker} on {date} must be positive, got {price}"
            )));
        }
        if observations.entry(ticker.clone()).or_default().insert(date, price).is_some() {
            return Err(Error::Validation(format!("line {line}: duplicate row for ({date}, {ticker})")));
        }
        all_dates.insert(date);
    }
    if all_dates.len() < 2 {
        return Err(Error::Validation(format!("need at least 2 distinct dates, found {}", all_dates.len())));
    }

    let dates: Vec<NaiveDate> = all_dates.into_iter().collect();
    let mut tickers = Vec::with_capacity(observations.len());
    let mut prices = Vec::with_capacity(observations.len());
    let mut missing = Vec::with_capacity(observations.len());
    for (ticker, series) in observations {
        let row: Vec<f64> = dates.iter().map(|d| series.get(d).copied().unwrap_or(f64::NAN)).collect();
        missing.push(row.iter().map(|p| p.is_nan()).collect());
        prices.push(row);
        tickers.push(ticker);
    }
    PricePanel::with_missing(tickers, dates, prices, missing)
}

fn csv_error(e: &csv::Error, line: u64) -> Error {
    Error::Parse { line, message: e.to_string() }
}

/// Drops every stock with more than `max_gap_days` missing days and fills the
/// remaining gaps with the last observed price.
///
/// Gaps before a stock's first observation take the first observed price, so
/// every filled day carries a zero return.
pub fn filter_liquidity(panel: &PricePanel, max_gap_days: usize) -> Result<PricePanel> {
    let mut tickers = Vec::new();
    let mut prices = Vec::new();
    for (i, ticker) in panel.tickers.iter().enumerate() {
        if panel.missing_count(i) > max_gap_days {
            continue;
        }
        let row = &panel.prices[i];
        let mask = &panel.missing[i];
        let Some(first) = row.iter().zip(mask).find(|(_, &m)| !m).map(|(p, _)| *p) else {
            continue;
        };
        let mut last = first;
        let filled = row
            .iter()
            .zip(mask)
            .map(|(&p, &m)| {
                if !m {
                    last = p;
                }
                last
            })
            .collect();
        tickers.push(ticker.clone());
        prices.push(filled);
    }
    if tickers.is_empty() {
        return Err(Error::EmptyUniverse { max_gap_days });
    }
    PricePanel::new(tickers, panel.dates.clone(), prices)
}

pub fn compute_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if panel.has_missing() {
        return Err(Error::MissingValues);
    }
    if panel.n_days() < 2 {
        return Err(Error::InsufficientData("need at least 2 dates for returns".into()));
    }
    let returns = panel.prices.iter().map(|row| row.windows(2).map(|w| w[1].ln() - w[0].ln()).collect()).collect();
    ReturnPanel::new(panel.tickers.clone(), panel.dates[0], panel.dates[1..].to_vec(), returns)
}

/// How per-stock return samples are aggregated into one row of statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsMode {
    /// Moments of the pooled sample of all stocks and days.
    #[default]
    Pooled,
    /// Average of per-stock moments; min and max stay global.
    PerStock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub market: String,
    pub stocks: usize,
    pub records: usize,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

pub const STATS_COLUMNS: [&str; 9] = ["Market", "N", "Records", "Mean", "Std", "Max", "Min", "Skewness", "Kurtosis"];

impl StatsReport {
    pub fn table_row(&self) -> Vec<String> {
        vec![
            self.market.clone(),
            self.stocks.to_string(),
            self.records.to_string(),
            format!("{:.6}", self.mean),
            format!("{:.6}", self.std),
            format!("{:.6}", self.max),
            format!("{:.6}", self.min),
            format!("{:.6}", self.skewness),
            format!("{:.6}", self.kurtosis),
        ]
    }
}

pub fn summary_stats(returns: &ReturnPanel, market: &str) -> Result<StatsReport> {
    summary_stats_with(returns, market, StatsMode::Pooled)
}

pub fn summary_stats_with(returns: &ReturnPanel, market: &str, mode: StatsMode) -> Result<StatsReport> {
    let pooled: Vec<f64> = returns.returns.iter().flatten().copied().collect();
    if pooled.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 pooled returns".into()));
    }
    let max = pooled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = pooled.iter().copied().fold(f64::INFINITY, f64::min);
    let degenerate = || Error::DegenerateSample("zero variance, skewness and kurtosis undefined".into());
    let m = match mode {
        StatsMode::Pooled => stats::moments(&pooled).ok_or_else(degenerate)?,
        StatsMode::PerStock => {
            let per: Vec<stats::Moments> =
                returns.returns.iter().map(|row| stats::moments(row).ok_or_else(degenerate)).collect::<Result<_>>()?;
            let k = per.len() as f64;
            stats::Moments {
                mean: per.iter().map(|m| m.mean).sum::<f64>() / k,
                variance: per.iter().map(|m| m.variance.sqrt()).sum::<f64>().powi(2) / (k * k),
                skewness: per.iter().map(|m| m.skewness).sum::<f64>() / k,
                kurtosis: per.iter().map(|m| m.kurtosis).sum::<f64>() / k,
            }
        }
    };
    Ok(StatsReport {
        market: market.to_string(),
        stocks: returns.n_stocks(),
        records: pooled.len(),
        mean: m.mean,
        std: m.variance.sqrt(),
        max,
        min,
        skewness: m.skewness,
        kurtosis: m.kurtosis,
    })
}

//! Synthetic markets: block-correlated Gaussian log returns with regime
//! segments and a planted drift on the block.

use std::io::Write;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{PricePanel, ReturnPanel, DATE_FORMAT};
use crate::regime::{Condition, IndexSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub condition: Condition,
    pub days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_stocks: usize,
    /// Number of price days; one fewer return column is generated.
    pub n_days: usize,
    pub start: NaiveDate,
    pub seed: u64,
    /// Daily standard deviation of every stock and of the index.
    pub daily_vol: f64,
    /// Correlation of stocks outside the block with each other.
    pub market_corr: f64,
    pub block_size: usize,
    /// Correlation of block stocks with each other.
    pub block_corr: f64,
    /// Regime segments in return days, in order; days past the last segment are stable.
    pub segments: Vec<Segment>,
    /// Daily drift of the whole market in drawup segments, negated in drawdown segments.
    pub regime_drift: f64,
    /// Extra return per horizon for block stocks on drawup days.
    pub planted_drift: f64,
    pub horizon_days: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_stocks: 181,
            n_days: 3600,
            start: NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"),
            seed: 0,
            daily_vol: 0.004,
            market_corr: 0.1,
            block_size: 18,
            block_corr: 0.6,
            segments: Vec::new(),
            regime_drift: 0.0,
            planted_drift: 0.0,
            horizon_days: 200,
        }
    }
}

impl SynthSpec {
    /// Independent zero-drift returns with no block.
    pub fn noise(n_stocks: usize, n_days: usize, seed: u64) -> Self {
        SynthSpec { n_stocks, n_days, seed, market_corr: 0.0, block_size: 0, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.n_stocks < 2 || self.n_days < 3 {
            return Err(Error::InvalidArgument("synthetic market needs at least 2 stocks and 3 days".into()));
        }
        if self.block_size > self.n_stocks {
            return Err(Error::InvalidArgument("block larger than the universe".into()));
        }
        let unit = |x: f64| (0.0..1.0).contains(&x);
        if !unit(self.market_corr) || !unit(self.block_corr) {
            return Err(Error::InvalidArgument("correlations must lie in [0, 1)".into()));
        }
        if !(self.daily_vol > 0.0 && self.daily_vol.is_finite()) {
            return Err(Error::InvalidArgument("daily_vol must be positive".into()));
        }
        if self.planted_drift != 0.0 && self.horizon_days == 0 {
            return Err(Error::InvalidArgument("planted drift needs a positive horizon".into()));
        }
        Ok(())
    }

    /// Condition of each return day.
    pub fn regimes(&self) -> Vec<Condition> {
        let mut out: Vec<Condition> =
            self.segments.iter().flat_map(|s| std::iter::repeat_n(s.condition, s.days)).collect();
        out.resize(self.n_days - 1, Condition::S);
        out
    }
}

/// Weekdays from `start` onward.
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

#[derive(Debug, Clone)]
pub struct SynthMarket {
    pub prices: PricePanel,
    pub returns: ReturnPanel,
    pub index: IndexSeries,
    /// Sorted tickers of the correlated block.
    pub block: Vec<String>,
    pub regimes: Vec<Condition>,
}

pub fn generate(spec: &SynthSpec) -> Result<SynthMarket> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.n_stocks.to_string().len().max(3);
    let tickers: Vec<String> = (0..spec.n_stocks).map(|i| format!("S{i:0width$}")).collect();
    let mut in_block = vec![false; spec.n_stocks];
    for i in index::sample(&mut rng, spec.n_stocks, spec.block_size) {
        in_block[i] = true;
    }
    // Block stocks load on the market factor only, which makes them the hubs of the tree.
    let loadings: Vec<f64> =
        in_block.iter().map(|&b| if b { spec.block_corr } else { spec.market_corr }.sqrt()).collect();
    let regimes = spec.regimes();
    let planted_daily = if spec.planted_drift != 0.0 { spec.planted_drift / spec.horizon_days as f64 } else { 0.0 };
    let days = spec.n_days - 1;
    let sigma = spec.daily_vol;

    let mut returns = vec![vec![0.0; days]; spec.n_stocks];
    let mut index_returns = vec![0.0; days];
    for t in 0..days {
        let drift = match regimes[t] {
            Condition::U => spec.regime_drift,
            Condition::S => 0.0,
            Condition::D => -spec.regime_drift,
        };
        let z_m: f64 = StandardNormal.sample(&mut rng);
        index_returns[t] = drift + sigma * z_m;
        for i in 0..spec.n_stocks {
            let e: f64 = StandardNormal.sample(&mut rng);
            let a = loadings[i];
            let mut r = drift + sigma * (a * z_m + (1.0 - a * a).sqrt() * e);
            if in_block[i] && regimes[t] == Condition::U {
                r += planted_daily;
            }
            returns[i][t] = r;
        }
    }

    let dates = business_days(spec.start, spec.n_days);
    let prices: Vec<Vec<f64>> = returns
        .iter()
        .map(|row| {
            let mut p = vec![10.0f64];
            for r in row {
                p.push(p[p.len() - 1] * r.exp());
            }
            p
        })
        .collect();
    let mut level = 1000.0f64;
    let mut levels = vec![level];
    for r in &index_returns {
        level *= r.exp();
        levels.push(level);
    }
    let block = tickers.iter().zip(&in_block).filter(|(_, b)| **b).map(|(t, _)| t.clone()).collect();
    Ok(SynthMarket {
        prices: PricePanel::new(tickers.clone(), dates.clone(), prices)?,
        returns: ReturnPanel::new(tickers, dates[0], dates[1..].to_vec(), returns)?,
        index: IndexSeries::new(dates, levels)?,
        block,
        regimes,
    })
}

impl SynthMarket {
    /// Writes `date,ticker,adjusted_close` rows.
    pub fn write_prices<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "ticker", "adjusted_close"]).map_err(csv_io)?;
        for (t, d) in self.prices.dates().iter().enumerate() {
            let date = d.format(DATE_FORMAT).to_string();
            for (i, ticker) in self.prices.tickers().iter().enumerate() {
                w.write_record([date.as_str(), ticker, &self.prices.prices()[i][t].to_string()]).map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `date,close` rows.
    pub fn write_index<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "close"]).map_err(csv_io)?;
        for (d, l) in self.index.dates().iter().zip(self.index.levels()) {
            w.write_record([d.format(DATE_FORMAT).to_string(), l.to_string()]).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

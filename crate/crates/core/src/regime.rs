//! Drawup / stable / drawdown classification of index windows.

use std::fmt;
use std::io::Read;
use std::ops::Range;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ReturnPanel, DATE_FORMAT};

/// Closing levels of a market index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    dates: Vec<NaiveDate>,
    levels: Vec<f64>,
}

impl IndexSeries {
    pub fn new(dates: Vec<NaiveDate>, levels: Vec<f64>) -> Result<Self> {
        if dates.len() != levels.len() {
            return Err(Error::Validation("index dates and levels differ in length".into()));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("index dates must be strictly increasing".into()));
        }
        if let Some(bad) = levels.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Validation(format!("index level must be positive and finite, got {bad}")));
        }
        Ok(Self { dates, levels })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Restricts the series to `dates`, each of which must be present.
    pub fn align(&self, dates: &[NaiveDate]) -> Result<IndexSeries> {
        let mut levels = Vec::with_capacity(dates.len());
        for d in dates {
            let i =
                self.dates.binary_search(d).map_err(|_| Error::Validation(format!("index has no level for {d}")))?;
            levels.push(self.levels[i]);
        }
        IndexSeries::new(dates.to_vec(), levels)
    }
}

/// Reads an index file with header `date,close`.
pub fn load_index<R: Read>(source: R) -> Result<IndexSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    if headers.len() != 2 || !headers[0].eq_ignore_ascii_case("date") || !headers[1].eq_ignore_ascii_case("close") {
        return Err(Error::Parse { line: 1, message: "expected header date,close".into() });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = NaiveDate::parse_from_str(&record[0], DATE_FORMAT)
            .map_err(|e| Error::Parse { line, message: format!("bad date {:?}: {e}", &record[0]) })?;
        let level: f64 =
            record[1].parse().map_err(|_| Error::Parse { line, message: format!("bad level {:?}", &record[1]) })?;
        rows.push((date, level));
    }
    rows.sort_by_key(|r| r.0);
    let (dates, levels) = rows.into_iter().unzip();
    IndexSeries::new(dates, levels)
}

/// Equal-weight index built from the panel's mean daily log return, starting at 1.
pub fn equal_weight_index(returns: &ReturnPanel) -> IndexSeries {
    let n = returns.n_stocks() as f64;
    let mut level = 1.0f64;
    let mut levels = vec![level];
    for t in 0..returns.n_days() {
        let mean: f64 = returns.returns().iter().map(|row| row[t]).sum::<f64>() / n;
        level *= mean.exp();
        levels.push(level);
    }
    IndexSeries { dates: returns.price_dates(), levels }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    TradingDay,
    Amplitude,
    Or,
    And,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::TradingDay, Criterion::Amplitude, Criterion::Or, Criterion::And];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::TradingDay => "trading_day",
            Criterion::Amplitude => "amplitude",
            Criterion::Or => "or",
            Criterion::And => "and",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Criterion::ALL
            .into_iter()
            .find(|c| c.label() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown criterion {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub criterion: Criterion,
}

impl RegimeConfig {
    pub fn new(theta_plus: f64, theta_minus: f64, criterion: Criterion) -> Result<Self> {
        if !(0.0 < theta_minus && theta_minus <= theta_plus && theta_plus < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "thresholds must satisfy 0 < theta_minus <= theta_plus < 1, got {theta_minus}, {theta_plus}"
            )));
        }
        Ok(Self { theta_plus, theta_minus, criterion })
    }

    pub fn with_criterion(self, criterion: Criterion) -> Self {
        Self { criterion, ..self }
    }
}

impl Default for RegimeConfig {
    fn default() -> Self {
        Self { theta_plus: 0.55, theta_minus: 0.45, criterion: Criterion::TradingDay }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    /// Drawup.
    U,
    /// Stable.
    S,
    /// Drawdown.
    D,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::U, Condition::S, Condition::D];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::U => "U",
            Condition::S => "S",
            Condition::D => "D",
        })
    }
}

/// Conditions of the selection window and of the investment horizon that follows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Combination {
    pub selection: Condition,
    pub investment: Condition,
}

impl Combination {
    /// UU, US, UD, SU, ..., DD.
    pub fn all() -> impl Iterator<Item = Combination> {
        Condition::ALL
            .into_iter()
            .flat_map(|s| Condition::ALL.into_iter().map(move |i| Combination { selection: s, investment: i }))
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.selection, self.investment)
    }
}

impl From<Combination> for String {
    fn from(c: Combination) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Combination {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Combination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Combination::all()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown combination {s:?}")))
    }
}

pub fn combine(selection: Condition, investment: Condition) -> Combination {
    Combination { selection, investment }
}

fn window(index: &IndexSeries, range: Range<usize>) -> Result<&[f64]> {
    if range.end > index.len() || range.start > range.end {
        return Err(Error::InvalidArgument(format!("window {range:?} outside index of length {}", index.len())));
    }
    let w = &index.levels[range];
    if w.len() < 2 {
        return Err(Error::InsufficientWindow(w.len()));
    }
    Ok(w)
}

/// Share of comparable days (window length - 1) on which the index closed
/// strictly higher than the day before.
pub fn ratio_trading_days(index: &IndexSeries, range: Range<usize>) -> Result<f64> {
    let w = window(index, range)?;
    let rises = w.windows(2).filter(|p| p[1] > p[0]).count();
    Ok(rises as f64 / (w.len() - 1) as f64)
}

/// Share of total absolute daily change contributed by rising days.
pub fn ratio_amplitude(index: &IndexSeries, range: Range<usize>) -> Result<f64> {
    let w = window(index, range)?;
    let (mut up, mut total) = (0.0, 0.0);
    for p in w.windows(2) {
        let change = p[1] - p[0];
        total += change.abs();
        if change > 0.0 {
            up += change;
        }
    }
    if total == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(up / total)
}

fn single(ratio: f64, cfg: &RegimeConfig) -> Condition {
    if ratio > cfg.theta_plus {
        Condition::U
    } else if ratio < cfg.theta_minus {
        Condition::D
    } else {
        Condition::S
    }
}

/// Labels a window from its ratios. `r_f` may be `None` only for the
/// trading-day criterion.
pub fn classify(r_d: f64, r_f: Option<f64>, cfg: &RegimeConfig) -> Result<Condition> {
    if cfg.criterion == Criterion::TradingDay {
        return Ok(single(r_d, cfg));
    }
    let r_f = r_f.ok_or(Error::UndefinedRatio)?;
    let (d, f) = (single(r_d, cfg), single(r_f, cfg));
    Ok(match cfg.criterion {
        Criterion::TradingDay => unreachable!(),
        Criterion::Amplitude => f,
        Criterion::Or => match (d, f) {
            (Condition::U, Condition::D) | (Condition::D, Condition::U) => {
                return Err(Error::Contradiction { r_d, r_f });
            }
            (Condition::U, _) | (_, Condition::U) => Condition::U,
            (Condition::D, _) | (_, Condition::D) => Condition::D,
            _ => Condition::S,
        },
        Criterion::And => match (d, f) {
            (Condition::U, Condition::U) => Condition::U,
            (Condition::D, Condition::D) => Condition::D,
            _ => Condition::S,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(levels: &[f64]) -> IndexSeries {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let dates = (0..levels.len()).map(|i| start + chrono::Days::new(i as u64)).collect();
        IndexSeries::new(dates, levels.to_vec()).unwrap()
    }

    #[test]
    fn trading_day_ratio_examples() {
        let up = series(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ratio_trading_days(&up, 0..4).unwrap(), 1.0);
        let mixed = series(&[1.0, 2.0, 3.0, 2.0, 3.0]);
        assert_eq!(ratio_trading_days(&mixed, 0..5).unwrap(), 0.75);
        let flat = series(&[5.0; 6]);
        assert_eq!(ratio_trading_days(&flat, 0..6).unwrap(), 0.0);
        assert!(matches!(ratio_trading_days(&flat, 0..1), Err(Error::InsufficientWindow(1))));
    }

    #[test]
    fn amplitude_ratio_examples() {
        let s = series(&[1.0, 2.0, 1.5]);
        assert!((ratio_amplitude(&s, 0..3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ratio_amplitude(&series(&[1.0, 1.5, 2.5]), 0..3).unwrap(), 1.0);
        assert!(matches!(ratio_amplitude(&series(&[3.0; 4]), 0..4), Err(Error::UndefinedRatio)));
    }

    #[test]
    fn classify_examples() {
        let cfg = RegimeConfig::default();
        assert_eq!(classify(0.6, None, &cfg).unwrap(), Condition::U);
        assert_eq!(classify(0.50, None, &cfg).unwrap(), Condition::S);
        assert_eq!(classify(0.55, None, &cfg).unwrap(), Condition::S);
        assert_eq!(classify(0.45, None, &cfg).unwrap(), Condition::S);
        assert_eq!(classify(0.449, None, &cfg).unwrap(), Condition::D);
        let or = cfg.with_criterion(Criterion::Or);
        assert!(matches!(classify(0.40, Some(0.60), &or), Err(Error::Contradiction { .. })));
        assert_eq!(classify(0.50, Some(0.60), &or).unwrap(), Condition::U);
        assert_eq!(classify(0.50, Some(0.40), &or).unwrap(), Condition::D);
        let and = cfg.with_criterion(Criterion::And);
        assert_eq!(classify(0.50, Some(0.60), &and).unwrap(), Condition::S);
        assert_eq!(classify(0.60, Some(0.60), &and).unwrap(), Condition::U);
        assert_eq!(classify(0.40, Some(0.30), &and).unwrap(), Condition::D);
        let amp = cfg.with_criterion(Criterion::Amplitude);
        assert_eq!(classify(0.1, Some(0.6), &amp).unwrap(), Condition::U);
        assert!(classify(0.1, None, &amp).is_err());
    }

    #[test]
    fn combination_labels() {
        assert_eq!(combine(Condition::U, Condition::U).to_string(), "UU");
        assert_eq!(combine(Condition::S, Condition::D).to_string(), "SD");
        assert_eq!(combine(Condition::D, Condition::S).to_string(), "DS");
        let all: Vec<String> = Combination::all().map(|c| c.to_string()).collect();
        assert_eq!(all, ["UU", "US", "UD", "SU", "SS", "SD", "DU", "DS", "DD"]);
        assert_eq!("SD".parse::<Combination>().unwrap(), combine(Condition::S, Condition::D));
    }

    #[test]
    fn config_validation() {
        assert!(RegimeConfig::new(0.45, 0.55, Criterion::Or).is_err());
        assert!(RegimeConfig::new(1.0, 0.5, Criterion::Or).is_err());
        assert!(RegimeConfig::new(0.5, 0.5, Criterion::Or).is_ok());
    }

    #[test]
    fn index_alignment() {
        let s = series(&[1.0, 2.0, 3.0]);
        let sub = s.align(&s.dates()[1..]).unwrap();
        assert_eq!(sub.levels(), &[2.0, 3.0]);
        let missing = [NaiveDate::from_ymd_opt(1999, 1, 1).unwrap()];
        assert!(s.align(&missing).is_err());
    }

    #[test]
    fn loads_index_file() {
        let text = "date,close\n2001-01-02,10\n2001-01-01,9.5\n";
        let s = load_index(text.as_bytes()).unwrap();
        assert_eq!(s.levels(), &[9.5, 10.0]);
        assert!(load_index("date,close\n2001-01-01,-3\n".as_bytes()).is_err());
    }
}

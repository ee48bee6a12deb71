use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Serialize;

use mstfolio::backtest::{BacktestConfig, Pooling, ReturnMode};
use mstfolio::ingest::{StatsMode, DATE_FORMAT};
use mstfolio::regime::{Condition, Criterion, RegimeConfig};
use mstfolio::selection::Parameter;
use mstfolio::synth::{Segment, SynthSpec};
use mstfolio::topology::PathLength;

/// Bad configuration; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid value {value:?} for {key}: {why}"))
}

/// Generator settings of the `synth` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub n_stocks: usize,
    pub n_days: usize,
    pub start: NaiveDate,
    pub daily_vol: f64,
    pub market_corr: f64,
    pub block_size: usize,
    pub block_corr: f64,
    /// Written as `U:800,D:400,...`.
    pub segments: String,
    pub regime_drift: f64,
    pub planted_drift: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let spec = SynthSpec::default();
        SynthConfig {
            n_stocks: spec.n_stocks,
            n_days: spec.n_days,
            start: spec.start,
            daily_vol: spec.daily_vol,
            market_corr: spec.market_corr,
            block_size: spec.block_size,
            block_corr: spec.block_corr,
            segments: String::new(),
            regime_drift: 0.0,
            planted_drift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub out: PathBuf,
    pub window_days: usize,
    pub step_days: usize,
    pub horizon_days: usize,
    pub fraction: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    /// `None` runs every criterion.
    pub criterion: Option<Criterion>,
    /// `None` runs every parameter.
    pub parameter: Option<Parameter>,
    pub base_seed: u64,
    pub random_draws: usize,
    pub min_samples: usize,
    pub significance: f64,
    /// Training uses anchors whose investment horizon ends before this date.
    pub train_end: Option<NaiveDate>,
    /// Testing uses anchors whose investment horizon starts on or after this date.
    pub test_start: Option<NaiveDate>,
    pub max_gap_days: usize,
    pub market: String,
    pub stats_mode: StatsMode,
    pub return_mode: ReturnMode,
    pub pooling: Pooling,
    pub path_length: PathLength,
    /// Candidate horizons of the horizon sweep; empty skips it.
    pub horizons: Vec<usize>,
    pub bins_per_decade: usize,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let bt = BacktestConfig::default();
        RunConfig {
            data: None,
            index: None,
            out: PathBuf::from("out"),
            window_days: bt.window_days,
            step_days: bt.step_days,
            horizon_days: bt.horizon_days,
            fraction: bt.fraction,
            theta_plus: bt.regime.theta_plus,
            theta_minus: bt.regime.theta_minus,
            criterion: None,
            parameter: None,
            base_seed: bt.base_seed,
            random_draws: bt.random_draws,
            min_samples: bt.min_samples,
            significance: bt.significance,
            train_end: None,
            test_start: None,
            max_gap_days: 46,
            market: "market".into(),
            stats_mode: StatsMode::Pooled,
            return_mode: ReturnMode::Log,
            pooling: Pooling::PerStock,
            path_length: PathLength::Weighted,
            horizons: Vec::new(),
            bins_per_decade: 5,
            synth: SynthConfig::default(),
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn date(key: &str, value: &str) -> Result<NaiveDate, ConfigError> {
    NaiveDate::parse_from_str(value, DATE_FORMAT).map_err(|e| bad(key, value, e))
}

fn all_or<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    if value.eq_ignore_ascii_case("all") {
        Ok(None)
    } else {
        value.parse().map(Some).map_err(|e| bad(key, value, e))
    }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    let norm = value.to_ascii_lowercase().replace('-', "_");
    options.iter().find(|(name, _)| *name == norm).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        bad(key, value, format!("expected one of {}", names.join(", ")))
    })
}

pub fn parse_segments(value: &str) -> Result<Vec<Segment>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|part| {
            let (c, d) = part.trim().split_once(':').ok_or_else(|| bad("segments", part, "expected CONDITION:DAYS"))?;
            let condition = match c.trim() {
                "U" | "u" => Condition::U,
                "S" | "s" => Condition::S,
                "D" | "d" => Condition::D,
                other => return Err(bad("segments", other, "condition must be U, S or D")),
            };
            Ok(Segment { condition, days: num("segments", d.trim())? })
        })
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` setting. Keys accept snake or kebab case.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "data" => self.data = Some(PathBuf::from(value)),
            "index" => self.index = (!value.is_empty()).then(|| PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "window_days" => self.window_days = num(k, value)?,
            "step_days" => self.step_days = num(k, value)?,
            "horizon_days" => self.horizon_days = num(k, value)?,
            "fraction" => self.fraction = num(k, value)?,
            "theta_plus" => self.theta_plus = num(k, value)?,
            "theta_minus" => self.theta_minus = num(k, value)?,
            "criterion" => self.criterion = all_or(k, value)?,
            "parameter" => self.parameter = all_or(k, value)?,
            "base_seed" | "seed" => self.base_seed = num(k, value)?,
            "random_draws" => self.random_draws = num(k, value)?,
            "min_samples" => self.min_samples = num(k, value)?,
            "significance" => self.significance = num(k, value)?,
            "train_end" => self.train_end = Some(date(k, value)?),
            "test_start" => self.test_start = Some(date(k, value)?),
            "max_gap_days" => self.max_gap_days = num(k, value)?,
            "market" => self.market = value.to_string(),
            "stats_mode" => {
                self.stats_mode =
                    choice(k, value, &[("pooled", StatsMode::Pooled), ("per_stock", StatsMode::PerStock)])?
            }
            "return_mode" => {
                self.return_mode = choice(k, value, &[("log", ReturnMode::Log), ("simple", ReturnMode::Simple)])?
            }
            "pooling" => {
                self.pooling =
                    choice(k, value, &[("per_stock", Pooling::PerStock), ("per_anchor", Pooling::PerAnchor)])?
            }
            "path_length" => {
                self.path_length = choice(k, value, &[("weighted", PathLength::Weighted), ("hops", PathLength::Hops)])?
            }
            "horizons" => {
                self.horizons = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(k, s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "bins_per_decade" => self.bins_per_decade = num(k, value)?,
            "n_stocks" => self.synth.n_stocks = num(k, value)?,
            "n_days" => self.synth.n_days = num(k, value)?,
            "start" => self.synth.start = date(k, value)?,
            "daily_vol" => self.synth.daily_vol = num(k, value)?,
            "market_corr" => self.synth.market_corr = num(k, value)?,
            "block_size" => self.synth.block_size = num(k, value)?,
            "block_corr" => self.synth.block_corr = num(k, value)?,
            "segments" => {
                parse_segments(value)?;
                self.synth.segments = value.to_string();
            }
            "regime_drift" => self.synth.regime_drift = num(k, value)?,
            "planted_drift" => self.synth.planted_drift = num(k, value)?,
            _ => return Err(ConfigError(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
            self.set(key, value).map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), n + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.backtest().validate().map_err(|e| ConfigError(e.to_string()))?;
        if let (Some(a), Some(b)) = (self.train_end, self.test_start) {
            if a > b {
                return Err(ConfigError(format!("train_end {a} is after test_start {b}")));
            }
        }
        if self.bins_per_decade == 0 {
            return Err(ConfigError("bins_per_decade must be positive".into()));
        }
        Ok(())
    }

    pub fn backtest(&self) -> BacktestConfig {
        BacktestConfig {
            window_days: self.window_days,
            step_days: self.step_days,
            horizon_days: self.horizon_days,
            fraction: self.fraction,
            regime: RegimeConfig {
                theta_plus: self.theta_plus,
                theta_minus: self.theta_minus,
                criterion: self.criterion.unwrap_or(Criterion::TradingDay),
            },
            base_seed: self.base_seed,
            random_draws: self.random_draws,
            min_samples: self.min_samples,
            significance: self.significance,
            return_mode: self.return_mode,
            path_length: self.path_length,
            pooling: self.pooling,
        }
    }

    pub fn synth_spec(&self) -> Result<SynthSpec, ConfigError> {
        let s = &self.synth;
        Ok(SynthSpec {
            n_stocks: s.n_stocks,
            n_days: s.n_days,
            start: s.start,
            seed: self.base_seed,
            daily_vol: s.daily_vol,
            market_corr: s.market_corr,
            block_size: s.block_size,
            block_corr: s.block_corr,
            segments: parse_segments(&s.segments)?,
            regime_drift: s.regime_drift,
            planted_drift: s.planted_drift,
            horizon_days: self.horizon_days,
        })
    }

    pub fn criteria(&self) -> Vec<Criterion> {
        self.criterion.map_or_else(|| Criterion::ALL.to_vec(), |c| vec![c])
    }

    pub fn parameters(&self) -> Vec<Parameter> {
        self.parameter.map_or_else(|| Parameter::ALL.to_vec(), |p| vec![p])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_accept_both_cases() {
        let mut c = RunConfig::default();
        c.set("window-days", "120").unwrap();
        c.set("random_draws", "50").unwrap();
        c.set("criterion", "and").unwrap();
        c.set("parameter", "d-degree").unwrap();
        assert_eq!(c.window_days, 120);
        assert_eq!(c.random_draws, 50);
        assert_eq!(c.criterion, Some(Criterion::And));
        assert_eq!(c.parameter, Some(Parameter::DistanceDegree));
        c.set("criterion", "all").unwrap();
        assert_eq!(c.criterion, None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = RunConfig::default();
        assert!(c.set("window", "3").is_err());
        assert!(c.set("fraction", "ten").is_err());
        assert!(c.set("pooling", "sideways").is_err());
        assert!(c.set("segments", "U800").is_err());
    }

    #[test]
    fn segments_parse() {
        let s = parse_segments("U:800, D:400,S:10").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1], Segment { condition: Condition::D, days: 400 });
    }

    #[test]
    fn split_order_checked() {
        let mut c = RunConfig::default();
        c.set("train_end", "2010-01-01").unwrap();
        c.set("test_start", "2009-01-01").unwrap();
        assert!(c.validate().is_err());
    }
}

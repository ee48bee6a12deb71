use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::anova::sharpe;
use super::compare::compare_regimes;
use super::pipeline::AnchorRecord;
use super::BacktestConfig;
use crate::error::{Error, Result};
use crate::regime::{Combination, Criterion};
use crate::selection::{Parameter, PortfolioKind};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Central,
    Peripheral,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub criterion: Criterion,
    pub parameter: Parameter,
    pub combination: Combination,
    pub choice: Choice,
    /// Training anchors behind the decision.
    pub num: usize,
    pub p_value: Option<f64>,
}

/// Optimal portfolio kind per (criterion, parameter, combination).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMap {
    pub entries: Vec<StrategyEntry>,
}

impl StrategyMap {
    pub fn choice(&self, criterion: Criterion, parameter: Parameter, combination: Combination) -> Choice {
        self.entries
            .iter()
            .find(|e| e.criterion == criterion && e.parameter == parameter && e.combination == combination)
            .map_or(Choice::None, |e| e.choice)
    }

    /// Map with every entry set to `none`.
    pub fn all_none() -> Self {
        let entries = Criterion::ALL
            .iter()
            .flat_map(|&c| Parameter::ALL.iter().map(move |&p| (c, p)))
            .flat_map(|(c, p)| Combination::all().map(move |k| (c, p, k)))
            .map(|(criterion, parameter, combination)| StrategyEntry {
                criterion,
                parameter,
                combination,
                choice: Choice::None,
                num: 0,
                p_value: None,
            })
            .collect();
        StrategyMap { entries }
    }

    pub fn invested_count(&self) -> usize {
        self.entries.iter().filter(|e| e.choice != Choice::None).count()
    }
}

/// Picks, per combination, the kind with the higher excess return wherever the
/// training comparison is reportable.
pub fn train_strategy(training: &[&AnchorRecord], config: &BacktestConfig) -> Result<StrategyMap> {
    if training.is_empty() {
        return Err(Error::InsufficientData("training period contains no complete horizon".into()));
    }
    let entries = Criterion::ALL
        .iter()
        .flat_map(|&criterion| compare_regimes(training, criterion, config))
        .map(|cell| StrategyEntry {
            criterion: cell.criterion,
            parameter: cell.parameter,
            combination: cell.combination,
            choice: match cell.winner() {
                Some(PortfolioKind::Central) => Choice::Central,
                Some(PortfolioKind::Peripheral) => Choice::Peripheral,
                _ => Choice::None,
            },
            num: cell.num,
            p_value: cell.p_value,
        })
        .collect();
    Ok(StrategyMap { entries })
}

/// Strategy and benchmark returns of one invested horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonPair {
    pub anchor_date: NaiveDate,
    pub combination: Combination,
    pub choice: Choice,
    pub strategy: f64,
    pub random: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyEvaluation {
    pub criterion: Criterion,
    pub parameter: Parameter,
    pub invested: usize,
    /// Mean strategy return minus mean random return over invested horizons.
    pub excess_return: Option<f64>,
    pub win_fraction: Option<f64>,
    pub sharpe: Option<f64>,
    /// No horizon was invested.
    pub empty: bool,
    pub pairs: Vec<HorizonPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub test_anchors: usize,
    pub evaluations: Vec<StrategyEvaluation>,
    /// True when no (criterion, parameter) made a single investment.
    pub empty: bool,
}

impl EmpiricalReport {
    pub fn evaluation(&self, criterion: Criterion, parameter: Parameter) -> Option<&StrategyEvaluation> {
        self.evaluations.iter().find(|e| e.criterion == criterion && e.parameter == parameter)
    }
}

fn evaluate_one(
    map: &StrategyMap,
    testing: &[&AnchorRecord],
    criterion: Criterion,
    parameter: Parameter,
) -> StrategyEvaluation {
    let pairs: Vec<HorizonPair> = testing
        .iter()
        .filter_map(|r| {
            let combination = r.combination(criterion)?;
            let choice = map.choice(criterion, parameter, combination);
            let sel = r.selection(parameter);
            let members = match choice {
                Choice::Central => &sel.central_idx,
                Choice::Peripheral => &sel.peripheral_idx,
                Choice::None => return None,
            };
            let strategy = r.returns_of(members).sum::<f64>() / members.len() as f64;
            Some(HorizonPair { anchor_date: r.date, combination, choice, strategy, random: r.random_mean })
        })
        .collect();
    let diffs: Vec<f64> = pairs.iter().map(|p| p.strategy - p.random).collect();
    let invested = pairs.len();
    StrategyEvaluation {
        criterion,
        parameter,
        invested,
        excess_return: (invested > 0).then(|| stats::mean(&diffs)),
        win_fraction: (invested > 0).then(|| diffs.iter().filter(|d| **d > 0.0).count() as f64 / invested as f64),
        sharpe: sharpe(&diffs).ok(),
        empty: invested == 0,
        pairs,
    }
}

/// Invests the mapped kind at every test anchor whose combination has one.
pub fn evaluate_strategy(map: &StrategyMap, testing: &[&AnchorRecord]) -> EmpiricalReport {
    let evaluations: Vec<StrategyEvaluation> = Criterion::ALL
        .iter()
        .flat_map(|&c| Parameter::ALL.iter().map(move |&p| (c, p)))
        .map(|(c, p)| evaluate_one(map, testing, c, p))
        .collect();
    let empty = evaluations.iter().all(|e| e.empty);
    EmpiricalReport { test_anchors: testing.len(), evaluations, empty }
}

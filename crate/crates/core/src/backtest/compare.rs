use serde::{Deserialize, Serialize};

use super::anova::anova_oneway;
use super::pipeline::AnchorRecord;
use super::{BacktestConfig, Pooling};
use crate::error::Error;
use crate::regime::{Combination, Criterion};
use crate::selection::Parameter;
use crate::stats;

/// Column order of the comparison table.
pub const COMPARISON_COLUMNS: [&str; 10] = [
    "Parameter",
    "Market condition",
    "Num",
    "f-value",
    "p-value",
    "central",
    "peripheral",
    "significant_5",
    "significant_10",
    "hidden",
];

/// Central versus peripheral excess returns in one regime bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub criterion: Criterion,
    pub parameter: Parameter,
    pub combination: Combination,
    /// Number of anchors in the bucket.
    pub num: usize,
    pub f_value: Option<f64>,
    pub p_value: Option<f64>,
    pub central: Option<f64>,
    pub peripheral: Option<f64>,
    pub significant_5: bool,
    pub significant_10: bool,
    /// Suppressed from reports: too few anchors, not significant, or not testable.
    pub hidden: bool,
}

impl ComparisonCell {
    /// Kind with the higher excess return, if the cell is reportable.
    pub fn winner(&self) -> Option<crate::selection::PortfolioKind> {
        use crate::selection::PortfolioKind;
        if self.hidden {
            return None;
        }
        match (self.central, self.peripheral) {
            (Some(c), Some(p)) if c > p => Some(PortfolioKind::Central),
            (Some(c), Some(p)) if p > c => Some(PortfolioKind::Peripheral),
            _ => None,
        }
    }
}

/// Excess-return samples of one portfolio kind over a set of anchors.
pub(crate) fn excess_group(
    records: &[&AnchorRecord],
    members: impl Fn(&AnchorRecord) -> &[usize],
    pooling: Pooling,
) -> Vec<f64> {
    let mut out = Vec::new();
    for r in records {
        let m = members(r);
        match pooling {
            Pooling::PerStock => out.extend(r.returns_of(m).map(|v| v - r.random_mean)),
            Pooling::PerAnchor => {
                out.push(r.returns_of(m).sum::<f64>() / m.len() as f64 - r.random_mean);
            }
        }
    }
    out
}

fn cell(
    records: &[&AnchorRecord],
    criterion: Criterion,
    parameter: Parameter,
    combination: Combination,
    config: &BacktestConfig,
) -> ComparisonCell {
    let bucket: Vec<&AnchorRecord> =
        records.iter().copied().filter(|r| r.combination(criterion) == Some(combination)).collect();
    let central = excess_group(&bucket, |r| &r.selection(parameter).central_idx, config.pooling);
    let peripheral = excess_group(&bucket, |r| &r.selection(parameter).peripheral_idx, config.pooling);
    let test = match anova_oneway(&central, &peripheral) {
        Ok(a) => Some(a),
        Err(Error::DegenerateAnova | Error::InsufficientData(_)) => None,
        Err(e) => unreachable!("anova on finite groups: {e}"),
    };
    let p_value = test.map(|a| a.p_value);
    let num = bucket.len();
    let significant_5 = p_value.is_some_and(|p| p < 0.05);
    let significant_10 = p_value.is_some_and(|p| p < 0.10);
    let hidden = num < config.min_samples || !p_value.is_some_and(|p| p < config.significance);
    ComparisonCell {
        criterion,
        parameter,
        combination,
        num,
        f_value: test.map(|a| a.f_value),
        p_value,
        central: (!central.is_empty()).then(|| stats::mean(&central)),
        peripheral: (!peripheral.is_empty()).then(|| stats::mean(&peripheral)),
        significant_5,
        significant_10,
        hidden,
    }
}

/// Every (parameter, combination) cell for one criterion, in parameter then
/// combination order. Hidden cells are still computed.
pub fn compare_regimes(
    records: &[&AnchorRecord],
    criterion: Criterion,
    config: &BacktestConfig,
) -> Vec<ComparisonCell> {
    Parameter::ALL
        .iter()
        .flat_map(|&p| Combination::all().map(move |c| (p, c)))
        .map(|(p, c)| cell(records, criterion, p, c, config))
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Rows of the comparison table, including hidden cells unless `reported_only`.
pub fn comparison_table(cells: &[ComparisonCell], reported_only: bool) -> Vec<Vec<String>> {
    cells
        .iter()
        .filter(|c| !reported_only || !c.hidden)
        .map(|c| {
            vec![
                c.parameter.label().to_string(),
                c.combination.to_string(),
                c.num.to_string(),
                fmt_opt(c.f_value),
                fmt_opt(c.p_value),
                fmt_opt(c.central),
                fmt_opt(c.peripheral),
                c.significant_5.to_string(),
                c.significant_10.to_string(),
                c.hidden.to_string(),
            ]
        })
        .collect()
}

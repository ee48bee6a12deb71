use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f_value: f64,
    pub p_value: f64,
    pub df_between: usize,
    pub df_within: usize,
}

/// One-way ANOVA over any number of groups. The p-value is the upper tail of
/// F(k - 1, n - k) evaluated through the regularized incomplete beta function.
pub fn anova(groups: &[&[f64]]) -> Result<Anova> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!("anova needs at least 2 groups, got {}", groups.len())));
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(Error::InsufficientData(format!("anova group has {} values, need 2", g.len())));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let k = groups.len();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = stats::mean(g);
        ss_between += g.len() as f64 * (m - grand).powi(2);
        ss_within += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let ms_within = ss_within / df_within as f64;
    let scale = groups.iter().flat_map(|g| g.iter()).map(|v| v * v).sum::<f64>() / n as f64;
    if ms_within <= 1e-28 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateAnova);
    }
    let f_value = (ss_between / df_between as f64) / ms_within;
    let p_value = stats::f_survival(f_value, df_between as f64, df_within as f64);
    Ok(Anova { f_value, p_value, df_between, df_within })
}

/// Two-group one-way ANOVA, F with (1, nA + nB - 2) degrees of freedom.
pub fn anova_oneway(group_a: &[f64], group_b: &[f64]) -> Result<Anova> {
    anova(&[group_a, group_b])
}

/// Mean of the excess-return series over its sample standard deviation.
pub fn sharpe(excess: &[f64]) -> Result<f64> {
    if excess.len() < 2 {
        return Err(Error::InsufficientData("sharpe ratio needs at least 2 values".into()));
    }
    let sd = stats::sample_std(excess);
    let m = stats::mean(excess);
    if sd <= 1e-15 * (1.0 + m.abs()) {
        return Err(Error::DegenerateSharpe);
    }
    Ok(m / sd)
}

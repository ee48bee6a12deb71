use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{distance_matrix, pearson_matrix};
use super::schedule::WindowSchedule;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::stats::{self, Moments};

/// Moments of the off-diagonal entries of one window's correlation and
/// distance matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub anchor: usize,
    pub date: NaiveDate,
    /// `None` when all off-diagonal entries are equal.
    pub corr: Option<Moments>,
    pub dist: Option<Moments>,
    pub mean_corr: f64,
    pub std_corr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum CrossCorrelation {
    Value(f64),
    TooFewAnchors,
    NoVariation,
}

impl CrossCorrelation {
    pub fn value(self) -> Option<f64> {
        match self {
            CrossCorrelation::Value(v) => Some(v),
            _ => None,
        }
    }
}

pub const MOMENT_NAMES: [&str; 4] = ["mean", "variance", "skewness", "kurtosis"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrack {
    pub rows: Vec<MomentRow>,
    /// Correlation across anchors between the correlation-matrix and
    /// distance-matrix tracks of mean, variance, skewness and kurtosis.
    pub cross: [CrossCorrelation; 4],
}

fn pick(m: &Moments, k: usize) -> f64 {
    match k {
        0 => m.mean,
        1 => m.variance,
        2 => m.skewness,
        _ => m.kurtosis,
    }
}

/// Correlation of two tracks, treating relative spread below 1e-12 as no variation.
pub fn track_correlation(x: &[f64], y: &[f64]) -> CrossCorrelation {
    if x.len() < 2 {
        return CrossCorrelation::TooFewAnchors;
    }
    let flat = |v: &[f64]| {
        let m = stats::mean(v);
        let spread = v.iter().map(|a| (a - m).abs()).fold(0.0, f64::max);
        spread <= 1e-12 * (1.0 + m.abs())
    };
    if flat(x) || flat(y) {
        return CrossCorrelation::NoVariation;
    }
    match stats::pearson(x, y) {
        Some(r) => CrossCorrelation::Value(r),
        None => CrossCorrelation::NoVariation,
    }
}

pub fn moment_track(schedule: &WindowSchedule, returns: &ReturnPanel) -> Result<MomentTrack> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule {
            total_days: schedule.total_days,
            window_days: schedule.window_days,
            horizon_days: schedule.horizon_days,
        });
    }
    let rows: Vec<MomentRow> = schedule
        .anchors
        .par_iter()
        .map(|&anchor| {
            let corr = pearson_matrix(returns, schedule.selection_range(anchor))?;
            let dist = distance_matrix(&corr);
            let c = corr.off_diagonal();
            let d = dist.off_diagonal();
            let mean_corr = stats::mean(&c);
            let std_corr = (c.iter().map(|v| (v - mean_corr).powi(2)).sum::<f64>() / c.len() as f64).sqrt();
            Ok(MomentRow {
                anchor,
                date: returns.dates()[anchor],
                corr: stats::moments(&c),
                dist: stats::moments(&d),
                mean_corr,
                std_corr,
            })
        })
        .collect::<Result<_>>()?;

    let paired: Vec<(&Moments, &Moments)> =
        rows.iter().filter_map(|r| Some((r.corr.as_ref()?, r.dist.as_ref()?))).collect();
    let cross = std::array::from_fn(|k| {
        let x: Vec<f64> = paired.iter().map(|(c, _)| pick(c, k)).collect();
        let y: Vec<f64> = paired.iter().map(|(_, d)| pick(d, k)).collect();
        if rows.len() < 2 {
            CrossCorrelation::TooFewAnchors
        } else if x.len() < 2 {
            CrossCorrelation::NoVariation
        } else {
            track_correlation(&x, &y)
        }
    });
    Ok(MomentTrack { rows, cross })
}

impl MomentTrack {
    pub const COLUMNS: [&'static str; 13] = [
        "anchor_date",
        "corr_mean",
        "corr_variance",
        "corr_skewness",
        "corr_kurtosis",
        "dist_mean",
        "dist_variance",
        "dist_skewness",
        "dist_kurtosis",
        "mean_corr",
        "band_lower",
        "band_upper",
        "std_corr",
    ];

    /// Rows of plot data; undefined moments are left empty.
    pub fn table(&self) -> Vec<Vec<String>> {
        let fmt = |m: &Option<Moments>, k: usize| m.as_ref().map_or(String::new(), |m| format!("{:.8}", pick(m, k)));
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![r.date.to_string()];
                row.extend((0..4).map(|k| fmt(&r.corr, k)));
                row.extend((0..4).map(|k| fmt(&r.dist, k)));
                row.push(format!("{:.8}", r.mean_corr));
                row.push(format!("{:.8}", r.mean_corr - r.std_corr));
                row.push(format!("{:.8}", r.mean_corr + r.std_corr));
                row.push(format!("{:.8}", r.std_corr));
                row
            })
            .collect()
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rolling selection windows and the investment horizons that follow them.
///
/// Anchors index return columns. For anchor `t` the selection window is the
/// returns `t - window_days + 1 ..= t` and the investment horizon is
/// `t + 1 ..= t + horizon_days`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSchedule {
    pub window_days: usize,
    pub step_days: usize,
    pub horizon_days: usize,
    /// Number of price observations the schedule was built for.
    pub total_days: usize,
    pub anchors: Vec<usize>,
}

impl WindowSchedule {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn selection_range(&self, anchor: usize) -> std::ops::Range<usize> {
        anchor + 1 - self.window_days..anchor + 1
    }

    pub fn horizon_range(&self, anchor: usize) -> std::ops::Range<usize> {
        anchor + 1..anchor + 1 + self.horizon_days
    }
}

/// Lays out anchors over `total_days` price observations (`total_days - 1`
/// return columns).
///
/// The first anchor is the earliest one with a full selection window
/// (`window_days - 1`); anchors then advance by `step_days` while the whole
/// investment horizon still fits in the return columns.
pub fn make_schedule(
    total_days: usize,
    window_days: usize,
    step_days: usize,
    horizon_days: usize,
) -> Result<WindowSchedule> {
    if window_days < 2 {
        return Err(Error::InvalidArgument(format!("window_days must be >= 2, got {window_days}")));
    }
    if step_days < 1 {
        return Err(Error::InvalidArgument("step_days must be >= 1".into()));
    }
    if horizon_days < 1 {
        return Err(Error::InvalidArgument("horizon_days must be >= 1".into()));
    }
    let empty = Error::EmptySchedule { total_days, window_days, horizon_days };
    // Last usable return column is total_days - 2.
    let Some(last_return) = total_days.checked_sub(2) else {
        return Err(empty);
    };
    let first = window_days - 1;
    let anchors: Vec<usize> = (first..).step_by(step_days).take_while(|&t| t + horizon_days <= last_return).collect();
    if anchors.is_empty() {
        return Err(empty);
    }
    Ok(WindowSchedule { window_days, step_days, horizon_days, total_days, anchors })
}

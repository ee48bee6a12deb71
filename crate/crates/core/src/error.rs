use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no tickers survive the liquidity filter (max gap {max_gap_days} days)")]
    EmptyUniverse { max_gap_days: usize },

    #[error("panel still has missing values; run filter_liquidity first")]
    MissingValues,

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error(
        "schedule is empty: {total_days} days cannot hold a {window_days}-day window plus a {horizon_days}-day horizon"
    )]
    EmptySchedule { total_days: usize, window_days: usize, horizon_days: usize },

    #[error("series for {ticker} has zero variance in the window")]
    DegenerateSeries { ticker: String },

    #[error("graph needs at least 2 nodes, got {0}")]
    TrivialGraph(usize),

    #[error("unknown ticker {0}")]
    UnknownTicker(String),

    #[error("power-law estimate diverges: every tail sample equals x_min")]
    DivergentEstimate,

    #[error("selection infeasible: {eligible} eligible nodes for a target of {target}")]
    SelectionInfeasible { eligible: usize, target: usize },

    #[error("window needs at least 2 levels, got {0}")]
    InsufficientWindow(usize),

    #[error("amplitude ratio undefined: every daily change in the window is zero")]
    UndefinedRatio,

    #[error("contradictory ratios for the OR criterion: r_d={r_d}, r_f={r_f}")]
    Contradiction { r_d: f64, r_f: f64 },

    #[error("horizon {start}..{end} exceeds the {len} available return days")]
    HorizonOutOfRange { start: usize, end: usize, len: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate anova: within-group variance is zero")]
    DegenerateAnova,

    #[error("degenerate sharpe ratio: excess series has zero standard deviation")]
    DegenerateSharpe,
}

impl Error {
    /// True for errors caused by bad input data or configuration rather than a
    /// failure inside the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Parse { .. }
                | Error::Validation(_)
                | Error::InvalidArgument(_)
                | Error::EmptyUniverse { .. }
                | Error::EmptySchedule { .. }
                | Error::UnknownTicker(_)
        )
    }
}

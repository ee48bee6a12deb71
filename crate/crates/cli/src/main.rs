mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

use config::{ConfigError, RunConfig};

/// Every configuration key, exposed as a kebab-case flag.
const KEYS: &[(&str, &str)] = &[
    ("data", "price file with header date,ticker,adjusted_close"),
    ("index", "index file with header date,close; defaults to an equal-weight index of the panel"),
    ("out", "output directory"),
    ("window_days", "selection window length in trading days"),
    ("step_days", "days between anchors"),
    ("horizon_days", "investment horizon length in trading days"),
    ("fraction", "share of the universe held by each portfolio"),
    ("theta_plus", "drawup threshold"),
    ("theta_minus", "drawdown threshold"),
    ("criterion", "trading_day, amplitude, or, and, or all"),
    ("parameter", "K, C, D_degree, D_correlation, D_distance, or all"),
    ("base_seed", "seed every random draw derives from"),
    ("random_draws", "random portfolios averaged into the benchmark at each anchor"),
    ("min_samples", "smallest bucket reported or used for training"),
    ("significance", "p-value below which a comparison is reported and traded"),
    ("train_end", "training uses horizons ending before this date"),
    ("test_start", "testing uses horizons starting on or after this date"),
    ("max_gap_days", "stocks with more missing days are dropped"),
    ("market", "market label in the statistics table"),
    ("stats_mode", "pooled or per_stock"),
    ("return_mode", "log or simple horizon returns"),
    ("pooling", "per_stock or per_anchor ANOVA groups"),
    ("path_length", "weighted or hops"),
    ("horizons", "comma-separated horizons for the horizon sweep"),
    ("bins_per_decade", "log-binned histogram resolution"),
    ("n_stocks", "synthetic universe size"),
    ("n_days", "synthetic price days"),
    ("start", "first synthetic date"),
    ("daily_vol", "synthetic daily volatility"),
    ("market_corr", "synthetic correlation outside the block"),
    ("block_size", "synthetic correlated block size"),
    ("block_corr", "synthetic correlation inside the block"),
    ("segments", "synthetic regime segments, e.g. U:800,D:400"),
    ("regime_drift", "synthetic daily market drift in U segments (negated in D)"),
    ("planted_drift", "synthetic extra return per horizon for block stocks on U days"),
];

const COMMANDS: &[(&str, &str)] = &[
    ("stats", "summary statistics of the daily returns"),
    ("network", "per-anchor trees, node metrics, moment tracks and power-law fits"),
    ("compare", "central versus peripheral comparison per market condition"),
    ("backtest", "train the strategy map and evaluate it out of sample"),
    ("synth", "write a synthetic market"),
];

fn cli() -> Command {
    let mut subcommands = Vec::new();
    for (name, about) in COMMANDS {
        let mut cmd = Command::new(*name)
            .about(*about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("flat key = value configuration file"));
        for (key, help) in KEYS {
            cmd = cmd.arg(Arg::new(*key).long(key.replace('_', "-")).value_name("VALUE").help(*help));
        }
        subcommands.push(cmd);
    }
    Command::new("mstfolio")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Minimum-spanning-tree portfolio selection and regime-conditioned backtests")
        .subcommand_required(true)
        .subcommands(subcommands)
}

/// Defaults, then the config file, then flags; the result is validated.
fn resolve(matches: &ArgMatches) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    if let Some(path) = matches.get_one::<String>("config") {
        config.apply_file(&PathBuf::from(path))?;
    }
    for (key, _) in KEYS {
        if matches.value_source(key) == Some(ValueSource::CommandLine) {
            if let Some(value) = matches.get_one::<String>(key) {
                config.set(key, value)?;
            }
        }
    }
    config.validate()?;
    Ok(config)
}

fn run(name: &str, matches: &ArgMatches) -> anyhow::Result<()> {
    let config = resolve(matches)?;
    match name {
        "stats" => commands::cmd_stats(&config),
        "network" => commands::cmd_network(&config),
        "compare" => commands::cmd_compare(&config),
        "backtest" => commands::cmd_backtest(&config),
        "synth" => commands::cmd_synth(&config),
        _ => unreachable!("clap rejects unknown subcommands"),
    }
}

fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<ConfigError>()
            || cause.is::<std::io::Error>()
            || cause.downcast_ref::<mstfolio::Error>().is_some_and(mstfolio::Error::is_input_error)
    })
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match run(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_input_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

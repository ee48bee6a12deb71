use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use serde::Serialize;
use serde_json::json;

use mstfolio::backtest::{
    compare_regimes, comparison_table, evaluate_strategy, horizon_sweep, run_pipeline, train_strategy, Pipeline,
    COMPARISON_COLUMNS,
};
use mstfolio::ingest::{
    compute_returns, filter_liquidity, load_prices, summary_stats_with, ReturnPanel, STATS_COLUMNS,
};
use mstfolio::network::{build_mst, distance_matrix, make_schedule, moment_track, pearson_matrix, to_dot, MomentTrack};
use mstfolio::regime::{equal_weight_index, load_index, Criterion, IndexSeries};
use mstfolio::selection::Parameter;
use mstfolio::synth::generate;
use mstfolio::topology::{fit_power_law, log_binned_pdf, node_metrics_with, PdfBin};

use crate::config::{ConfigError, RunConfig};
use crate::output::{sha256_file, OutputDir};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const MIN_TAIL_SAMPLES: usize = 10;

struct Inputs {
    returns: ReturnPanel,
    index: IndexSeries,
    digests: Vec<(String, String)>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn load_returns(config: &RunConfig) -> Result<(ReturnPanel, Vec<(String, String)>)> {
    let data = config.data.as_deref().ok_or_else(|| ConfigError("a data file is required (--data)".into()))?;
    let prices = load_prices(open(data)?).with_context(|| format!("loading {}", data.display()))?;
    let kept = filter_liquidity(&prices, config.max_gap_days)?;
    if kept.n_stocks() < prices.n_stocks() {
        eprintln!(
            "dropped {} of {} stocks with more than {} missing days",
            prices.n_stocks() - kept.n_stocks(),
            prices.n_stocks(),
            config.max_gap_days
        );
    }
    let returns = compute_returns(&kept)?;
    Ok((returns, vec![(data.display().to_string(), sha256_file(data)?)]))
}

fn load_inputs(config: &RunConfig) -> Result<Inputs> {
    let (returns, mut digests) = load_returns(config)?;
    let index = match &config.index {
        Some(path) => {
            let full = load_index(open(path)?).with_context(|| format!("loading {}", path.display()))?;
            digests.push((path.display().to_string(), sha256_file(path)?));
            full.align(&returns.price_dates())?
        }
        None => equal_weight_index(&returns),
    };
    Ok(Inputs { returns, index, digests })
}

fn date_name(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

fn manifest(
    out: &mut OutputDir,
    command: &str,
    config: &RunConfig,
    inputs: &[(String, String)],
    seeds: serde_json::Value,
) -> Result<()> {
    let outputs: Vec<_> =
        out.digests()?.into_iter().map(|(file, sha256)| json!({ "file": file, "sha256": sha256 })).collect();
    let inputs: Vec<_> = inputs.iter().map(|(path, sha256)| json!({ "path": path, "sha256": sha256 })).collect();
    out.json(
        "manifest.json",
        &json!({
            "tool": "mstfolio",
            "version": VERSION,
            "command": command,
            "config": config,
            "seeds": seeds,
            "inputs": inputs,
            "outputs": outputs,
        }),
    )
}

fn base_seeds(config: &RunConfig) -> serde_json::Value {
    json!({ "base_seed": config.base_seed, "derivation": "base_seed ^ anchor_ordinal ^ (stream << 40)" })
}

fn pipeline_seeds(config: &RunConfig, pipeline: &Pipeline) -> serde_json::Value {
    let anchors: Vec<_> = pipeline
        .records
        .iter()
        .map(|r| {
            let peripheral: serde_json::Map<String, serde_json::Value> =
                r.selections.iter().map(|s| (s.parameter.label().to_string(), json!(s.peripheral.seed))).collect();
            json!({ "anchor_date": date_name(r.date), "benchmark": r.random_seed, "peripheral": peripheral })
        })
        .collect();
    let mut v = base_seeds(config);
    v["anchors"] = json!(anchors);
    v
}

pub fn cmd_stats(config: &RunConfig) -> Result<()> {
    let (returns, digests) = load_returns(config)?;
    let report = summary_stats_with(&returns, &config.market, config.stats_mode)?;
    let mut out = OutputDir::create(&config.out)?;
    out.json("stats.json", &report)?;
    out.table("stats.csv", &STATS_COLUMNS, &[report.table_row()])?;
    manifest(&mut out, "stats", config, &digests, base_seeds(config))?;
    eprintln!("{} stocks, {} records", report.stocks, report.records);
    Ok(())
}

#[derive(Serialize)]
struct TailFit {
    metric: &'static str,
    x_min: Option<f64>,
    tail_samples: usize,
    alpha: Option<f64>,
    note: Option<String>,
}

fn tail_fit(metric: &'static str, samples: &[f64], x_min: Option<f64>) -> TailFit {
    let Some(x_min) = x_min else {
        return TailFit { metric, x_min: None, tail_samples: 0, alpha: None, note: Some("no positive samples".into()) };
    };
    let tail_samples = samples.iter().filter(|&&x| x >= x_min).count();
    if tail_samples < MIN_TAIL_SAMPLES {
        let note = Some(format!("fewer than {MIN_TAIL_SAMPLES} samples at or above x_min"));
        return TailFit { metric, x_min: Some(x_min), tail_samples, alpha: None, note };
    }
    match fit_power_law(samples, x_min) {
        Ok(fit) => TailFit { metric, x_min: Some(x_min), tail_samples, alpha: Some(fit.alpha), note: None },
        Err(e) => TailFit { metric, x_min: Some(x_min), tail_samples, alpha: None, note: Some(e.to_string()) },
    }
}

fn pdf_rows(bins: &[PdfBin]) -> Vec<Vec<String>> {
    bins.iter()
        .map(|b| {
            vec![
                format!("{:.8e}", b.lower),
                format!("{:.8e}", b.upper),
                format!("{:.8e}", b.center),
                b.count.to_string(),
                format!("{:.8e}", b.density),
            ]
        })
        .collect()
}

const PDF_COLUMNS: [&str; 5] = ["lower", "upper", "center", "count", "density"];
const METRIC_COLUMNS: [&str; 7] = ["anchor_date", "ticker", "K", "C", "D_degree", "D_correlation", "D_distance"];

pub fn cmd_network(config: &RunConfig) -> Result<()> {
    let (returns, digests) = load_returns(config)?;
    let schedule = make_schedule(returns.n_days() + 1, config.window_days, config.step_days, config.horizon_days)?;
    let mut out = OutputDir::create(&config.out)?;
    let (mut degrees, mut betweenness, mut edge_lengths) = (Vec::new(), Vec::new(), Vec::new());
    for &anchor in &schedule.anchors {
        let date = date_name(returns.dates()[anchor]);
        let corr = pearson_matrix(&returns, schedule.selection_range(anchor))?;
        let tree = build_mst(&distance_matrix(&corr))?;
        let m = node_metrics_with(&tree, &corr, config.path_length)?;
        let rows: Vec<Vec<String>> = (0..m.len())
            .map(|i| {
                vec![
                    date.clone(),
                    m.tickers[i].clone(),
                    m.degree[i].to_string(),
                    m.betweenness[i].to_string(),
                    format!("{:.8}", m.d_degree[i]),
                    format!("{:.8}", m.d_correlation[i]),
                    format!("{:.8}", m.d_distance[i]),
                ]
            })
            .collect();
        out.table(&format!("metrics_{date}.csv"), &METRIC_COLUMNS, &rows)?;
        out.text(&format!("mst_{date}.dot"), &to_dot(&tree, &format!("mst_{date}")))?;
        degrees.extend(m.degree.iter().map(|&k| k as f64));
        betweenness.extend(m.betweenness.iter().map(|&c| c as f64));
        edge_lengths.extend(tree.edges().iter().map(|e| e.weight));
    }

    let track = moment_track(&schedule, &returns)?;
    out.table("moments.csv", &MomentTrack::COLUMNS, &track.table())?;
    let cross: serde_json::Map<String, serde_json::Value> = mstfolio::network::MOMENT_NAMES
        .iter()
        .zip(track.cross)
        .map(|(name, c)| (name.to_string(), json!(c.value())))
        .collect();
    out.json("moments_cross.json", &cross)?;

    let c_min = betweenness
        .iter()
        .copied()
        .filter(|&c| c > 0.0)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))));
    let fits = [tail_fit("K", &degrees, Some(1.0)), tail_fit("C", &betweenness, c_min)];
    out.json("power_law.json", &fits)?;
    out.table("pdf_K.csv", &PDF_COLUMNS, &pdf_rows(&log_binned_pdf(&degrees, config.bins_per_decade)))?;
    out.table("pdf_C.csv", &PDF_COLUMNS, &pdf_rows(&log_binned_pdf(&betweenness, config.bins_per_decade)))?;
    out.table("pdf_distance.csv", &PDF_COLUMNS, &pdf_rows(&log_binned_pdf(&edge_lengths, config.bins_per_decade)))?;
    manifest(&mut out, "network", config, &digests, base_seeds(config))?;
    eprintln!("{} anchors, {} stocks", schedule.len(), returns.n_stocks());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.8}")).unwrap_or_default()
}

fn regime_rows(pipeline: &Pipeline) -> Vec<Vec<String>> {
    pipeline
        .records
        .iter()
        .map(|r| {
            let mut row = vec![
                date_name(r.date),
                date_name(r.horizon_start),
                date_name(r.horizon_end),
                format!("{:.8}", r.selection_ratios.r_d),
                fmt_opt(r.selection_ratios.r_f),
                format!("{:.8}", r.investment_ratios.r_d),
                fmt_opt(r.investment_ratios.r_f),
            ];
            row.extend(Criterion::ALL.iter().map(|&c| r.combination(c).map(|k| k.to_string()).unwrap_or_default()));
            row
        })
        .collect()
}

const REGIME_COLUMNS: [&str; 11] = [
    "anchor_date",
    "horizon_start",
    "horizon_end",
    "selection_r_d",
    "selection_r_f",
    "investment_r_d",
    "investment_r_f",
    "trading_day",
    "amplitude",
    "or",
    "and",
];

fn write_portfolios(out: &mut OutputDir, pipeline: &Pipeline, parameters: &[Parameter]) -> Result<()> {
    let mut lines = Vec::new();
    for r in &pipeline.records {
        for s in r.selections.iter().filter(|s| parameters.contains(&s.parameter)) {
            lines.push(&s.central);
            lines.push(&s.peripheral);
        }
    }
    out.jsonl("portfolios.jsonl", &lines)
}

pub fn cmd_compare(config: &RunConfig) -> Result<()> {
    let inputs = load_inputs(config)?;
    let bt = config.backtest();
    let pipeline = run_pipeline(&inputs.returns, &inputs.index, &bt)?;
    let mut out = OutputDir::create(&config.out)?;
    out.table("regimes.csv", &REGIME_COLUMNS, &regime_rows(&pipeline))?;
    write_portfolios(&mut out, &pipeline, &config.parameters())?;
    let all = pipeline.all();
    let (mut hidden, mut total) = (0, 0);
    for criterion in config.criteria() {
        let cells = compare_regimes(&all, criterion, &bt);
        for parameter in config.parameters() {
            let cells: Vec<_> = cells.iter().filter(|c| c.parameter == parameter).cloned().collect();
            hidden += cells.iter().filter(|c| c.hidden).count();
            total += cells.len();
            out.table(
                &format!("comparison_{}_{}.csv", criterion.label(), parameter.label()),
                &COMPARISON_COLUMNS,
                &comparison_table(&cells, false),
            )?;
        }
    }
    manifest(&mut out, "compare", config, &inputs.digests, pipeline_seeds(config, &pipeline))?;
    eprintln!("{} anchors; {hidden} of {total} cells hidden", pipeline.records.len());
    Ok(())
}

/// Training end and test start; both default to the price date two thirds into the panel.
fn split_dates(config: &RunConfig, index: &IndexSeries) -> (NaiveDate, NaiveDate) {
    let default = index.dates()[index.len() * 2 / 3];
    let train_end = config.train_end.or(config.test_start).unwrap_or(default);
    let test_start = config.test_start.unwrap_or(train_end);
    (train_end, test_start)
}

const PAIR_COLUMNS: [&str; 7] =
    ["criterion", "parameter", "anchor_date", "combination", "choice", "strategy", "random"];

pub fn cmd_backtest(config: &RunConfig) -> Result<()> {
    let inputs = load_inputs(config)?;
    let bt = config.backtest();
    let pipeline = run_pipeline(&inputs.returns, &inputs.index, &bt)?;
    let (train_end, test_start) = split_dates(config, &inputs.index);
    let training = pipeline.training(train_end);
    let testing = pipeline.testing(test_start);
    let map = train_strategy(&training, &bt)?;
    let report = evaluate_strategy(&map, &testing);

    let mut out = OutputDir::create(&config.out)?;
    out.json("strategy_map.json", &map)?;
    out.json("empirical_report.json", &report)?;
    let criteria = config.criteria();
    let parameters = config.parameters();
    let pairs: Vec<Vec<String>> = report
        .evaluations
        .iter()
        .filter(|e| criteria.contains(&e.criterion) && parameters.contains(&e.parameter))
        .flat_map(|e| {
            e.pairs.iter().map(|p| {
                vec![
                    e.criterion.label().to_string(),
                    e.parameter.label().to_string(),
                    date_name(p.anchor_date),
                    p.combination.to_string(),
                    serde_json::to_value(p.choice)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default(),
                    format!("{:.8}", p.strategy),
                    format!("{:.8}", p.random),
                ]
            })
        })
        .collect();
    out.table("horizon_pairs.csv", &PAIR_COLUMNS, &pairs)?;
    if !config.horizons.is_empty() {
        let sweep = horizon_sweep(&inputs.returns, &bt, &config.horizons)?;
        out.json("horizon_sweep.json", &sweep)?;
    }
    let mut seeds = pipeline_seeds(config, &pipeline);
    seeds["split"] = json!({ "train_end": date_name(train_end), "test_start": date_name(test_start) });
    manifest(&mut out, "backtest", config, &inputs.digests, seeds)?;

    eprintln!("{} training and {} test anchors; {} mapped cells", training.len(), testing.len(), map.invested_count());
    if report.empty {
        eprintln!("warning: the strategy map made no investment in the test period");
    }
    Ok(())
}

pub fn cmd_synth(config: &RunConfig) -> Result<()> {
    let spec = config.synth_spec()?;
    let market = generate(&spec)?;
    let mut out = OutputDir::create(&config.out)?;
    let mut prices = Vec::new();
    market.write_prices(&mut prices)?;
    out.text("prices.csv", std::str::from_utf8(&prices)?)?;
    let mut index = Vec::new();
    market.write_index(&mut index)?;
    out.text("index.csv", std::str::from_utf8(&index)?)?;
    out.json("synth.json", &json!({ "spec": spec, "block": market.block }))?;
    manifest(&mut out, "synth", config, &[], json!({ "base_seed": config.base_seed }))?;
    eprintln!("{} stocks over {} days", spec.n_stocks, spec.n_days);
    Ok(())
}

//! One PASS/FAIL line per acceptance criterion.
//!
//! The report goes to stderr even when output is captured. The test fails on
//! any FAIL line that is not listed as a known, explained shortfall.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use common::{prufer_edges, random_dist, random_tree, rng};
use mstfolio::backtest::*;
use mstfolio::network::DistMatrix;
use mstfolio::network::{build_mst, make_schedule, MstGraph};
use mstfolio::regime::*;
use mstfolio::selection::{portfolio_size, Parameter};
use mstfolio::stats;
use mstfolio::synth::{generate, Segment, SynthSpec};
use mstfolio::topology::{betweenness, fit_power_law};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
    /// Reason the criterion cannot be met as written; only set when every
    /// other part of the criterion passed.
    known_shortfall: Option<&'static str>,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, known_shortfall: None }
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

/// Weights summed in ascending order, so equal edge sets give equal totals.
fn total(mut weights: Vec<f64>) -> f64 {
    weights.sort_by(f64::total_cmp);
    weights.iter().sum()
}

/// Minimum over every labeled spanning tree, by Prüfer enumeration.
fn cayley_minimum(d: &DistMatrix) -> f64 {
    let n = d.len();
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; n - 2];
    loop {
        best = best.min(total(prufer_edges(&seq, n).iter().map(|&(a, b)| d.get(a, b)).collect()));
        let Some(k) = seq.iter().position(|&s| s + 1 < n) else {
            return best;
        };
        seq[k] += 1;
        seq[..k].fill(0);
    }
}

fn mst_optimality() -> Outcome {
    let (out, elapsed) = timed(|| {
        let mut r = rng(1);
        let mut mismatches = 0;
        for k in 0..200 {
            let n = 3 + k % 4;
            let d = random_dist(n, &mut r);
            let tree = build_mst(&d).unwrap();
            let ours = total(tree.edges().iter().map(|e| d.get(e.a, e.b)).collect());
            if ours != cayley_minimum(&d) {
                mismatches += 1;
            }
        }
        Outcome::check(mismatches == 0, format!("{mismatches} mismatches over 200 matrices"))
    });
    let pass = out.pass && elapsed < Duration::from_secs(5);
    Outcome::check(pass, format!("{}, {:.2?}", out.detail, elapsed))
}

#[allow(clippy::needless_range_loop)]
fn pathwalk(tree: &MstGraph) -> Vec<u64> {
    let paths = common::all_pairs_paths(tree);
    let n = tree.len();
    let mut c = vec![0u64; n];
    for s in 0..n {
        for t in s + 1..n {
            let p = &paths[s][t].1;
            for &v in &p[1..p.len() - 1] {
                c[v] += 1;
            }
        }
    }
    c
}

fn betweenness_dual_oracle() -> Outcome {
    let (out, elapsed) = timed(|| {
        let mut r = rng(2);
        let (mut mismatches, mut leaf_errors) = (0, 0);
        for _ in 0..100 {
            let n = r.random_range(2..=25);
            let tree = random_tree(n, &mut r);
            let c = betweenness(&tree);
            if c != pathwalk(&tree) {
                mismatches += 1;
            }
            leaf_errors += (0..n).filter(|&v| tree.degree(v) == 1 && c[v] != 0).count();
        }
        Outcome::check(
            mismatches == 0 && leaf_errors == 0,
            format!("{mismatches} mismatches, {leaf_errors} nonzero leaves over 100 trees"),
        )
    });
    let pass = out.pass && elapsed < Duration::from_secs(5);
    Outcome::check(pass, format!("{}, {:.2?}", out.detail, elapsed))
}

fn anova_oracle() -> Outcome {
    let a = anova_oneway(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
    let reference = 1.0 - FisherSnedecor::new(1.0, 4.0).unwrap().cdf(1.5);
    let example = (a.f_value - 1.5).abs() < 1e-12
        && a.df_between == 1
        && a.df_within == 4
        && (a.p_value - reference).abs() < 1e-3
        && (a.p_value - 0.288).abs() < 1e-3;

    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (na, nb) = (r.random_range(2..30), r.random_range(2..30));
        let xs: Vec<f64> = (0..na).map(|_| r.random_range(-10.0..10.0)).collect();
        let ys: Vec<f64> = (0..nb).map(|_| r.random_range(-10.0..10.0)).collect();
        let f = anova_oneway(&xs, &ys).unwrap().f_value;
        let (mx, my) = (stats::mean(&xs), stats::mean(&ys));
        let ss = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() + ys.iter().map(|y| (y - my).powi(2)).sum::<f64>();
        let sp2 = ss / (na + nb - 2) as f64;
        let t = (mx - my) / (sp2 * (1.0 / na as f64 + 1.0 / nb as f64)).sqrt();
        worst = worst.max((f - t * t).abs() / (1.0 + f));
    }
    Outcome::check(
        example && worst <= 1e-9,
        format!(
            "F = {}, df ({}, {}), p = {:.6} vs {reference:.6}; worst |F - t^2| {worst:.1e}",
            a.f_value, a.df_between, a.df_within, a.p_value
        ),
    )
}

fn series(levels: &[f64]) -> IndexSeries {
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let dates = (0..levels.len()).map(|i| start + chrono::Days::new(i as u64)).collect();
    IndexSeries::new(dates, levels.to_vec()).unwrap()
}

fn regime_fixtures() -> Outcome {
    let cfg = |c| RegimeConfig::default().with_criterion(c);
    let r_d = ratio_trading_days(&series(&[1.0, 2.0, 3.0, 2.0, 3.0]), 0..5).unwrap();
    let r_f = ratio_amplitude(&series(&[1.0, 2.0, 1.5]), 0..3).unwrap();
    let fixtures = (r_d - 0.75).abs() < 1e-15
        && (r_f - 2.0 / 3.0).abs() < 1e-15
        && classify(0.55, None, &cfg(Criterion::TradingDay)).unwrap() == Condition::S
        && classify(0.45, None, &cfg(Criterion::TradingDay)).unwrap() == Condition::S
        && classify(0.6, None, &cfg(Criterion::TradingDay)).unwrap() == Condition::U;

    let mut r = rng(4);
    let mut violations = 0;
    for _ in 0..10_000 {
        let (d, f): (f64, f64) = (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0));
        let and = classify(d, Some(f), &cfg(Criterion::And)).unwrap();
        let or = classify(d, Some(f), &cfg(Criterion::Or)).ok();
        if and != Condition::S && or != Some(and) {
            violations += 1;
        }
    }
    Outcome::check(
        fixtures && violations == 0,
        format!("r_d = {r_d}, r_f = {r_f:.6}, 0.55 -> S; {violations} containment violations over 10^4 pairs"),
    )
}

fn power_law_mle() -> Outcome {
    let u = Uniform::new(0.0f64, 1.0).unwrap();
    let mut hits = 0;
    let mut worst_cov = 0.0f64;
    for seed in 0..100 {
        let mut r = rng(500 + seed);
        let xs: Vec<f64> = (0..10_000).map(|_| (1.0 - u.sample(&mut r)).powf(-1.0 / 1.5)).collect();
        let fit = fit_power_law(&xs, 1.0).unwrap();
        if (2.4..=2.6).contains(&fit.alpha) {
            hits += 1;
        }
        let scale = r.random_range(0.001..1000.0);
        let scaled: Vec<f64> = xs.iter().map(|x| x * scale).collect();
        let other = fit_power_law(&scaled, scale).unwrap();
        worst_cov = worst_cov.max((other.alpha - fit.alpha).abs());
    }
    Outcome::check(
        hits >= 95 && worst_cov <= 1e-12,
        format!("{hits}/100 fits in [2.4, 2.6]; scale drift {worst_cov:.1e}"),
    )
}

fn planted_spec(seed: u64) -> SynthSpec {
    let seg = |condition, days| Segment { condition, days };
    let daily_vol = 0.0025;
    SynthSpec {
        seed,
        daily_vol,
        segments: vec![
            seg(Condition::U, 800),
            seg(Condition::D, 400),
            seg(Condition::U, 800),
            seg(Condition::S, 400),
            seg(Condition::U, 800),
            seg(Condition::D, 400),
        ],
        regime_drift: 0.4 * daily_vol,
        planted_drift: 0.02,
        ..Default::default()
    }
}

fn planted_signal() -> Outcome {
    let cfg = BacktestConfig::default();
    let (criterion, parameter) = (Criterion::TradingDay, Parameter::Degree);
    let t0 = Instant::now();
    let (mut good, mut anchors) = (0, BTreeMap::new());
    for seed in 0..100 {
        let market = generate(&planted_spec(seed)).unwrap();
        let pipeline = run_pipeline(&market.returns, &market.index, &cfg).unwrap();
        *anchors.entry(pipeline.records.len()).or_insert(0) += 1;
        let split = market.index.dates()[market.index.len() * 2 / 3];
        let map = train_strategy(&pipeline.training(split), &cfg).unwrap();
        let planted: Vec<_> = map
            .entries
            .iter()
            .filter(|e| {
                e.criterion == criterion
                    && e.parameter == parameter
                    && e.combination.investment == Condition::U
                    && e.num >= cfg.min_samples
            })
            .collect();
        let mapped = !planted.is_empty() && planted.iter().all(|e| e.choice == Choice::Central);
        let report = evaluate_strategy(&map, &pipeline.testing(split));
        let excess = report.evaluation(criterion, parameter).and_then(|e| e.excess_return);
        if mapped && excess.is_some_and(|x| x > 0.0) {
            good += 1;
        }
    }
    let elapsed = t0.elapsed();
    Outcome::check(
        good >= 90 && anchors.keys().eq([160].iter()) && elapsed < Duration::from_secs(120),
        format!("{good}/100 seeds central and positive; anchors {anchors:?}; {elapsed:.1?}"),
    )
}

fn null_calibration() -> Outcome {
    let cfg = BacktestConfig::default();
    let (mut significant, mut tested) = (0usize, 0usize);
    let mut wins = Vec::new();
    for seed in 0..100 {
        let market = generate(&SynthSpec::noise(181, 3600, 1000 + seed)).unwrap();
        let index = equal_weight_index(&market.returns);
        let pipeline = run_pipeline(&market.returns, &index, &cfg).unwrap();
        for criterion in Criterion::ALL {
            for cell in compare_regimes(&pipeline.all(), criterion, &cfg) {
                if cell.num >= cfg.min_samples && cell.p_value.is_some() {
                    tested += 1;
                    significant += cell.significant_10 as usize;
                }
            }
        }
        let split = index.dates()[index.len() * 2 / 3];
        let map = train_strategy(&pipeline.training(split), &cfg).unwrap();
        let report = evaluate_strategy(&map, &pipeline.testing(split));
        wins.extend(report.evaluations.iter().filter_map(|e| e.win_fraction));
    }
    let rate = significant as f64 / tested as f64;
    let win = if wins.is_empty() { f64::NAN } else { stats::mean(&wins) };
    Outcome::check(
        (0.03..=0.20).contains(&rate) && (win - 0.5).abs() <= 0.1,
        format!(
            "significance rate {significant}/{tested} = {rate:.3}; mean win fraction {win:.3} over {} evaluations",
            wins.len()
        ),
    )
}

fn digests(dir: &Path) -> BTreeMap<String, String> {
    use sha2::{Digest, Sha256};
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        out.insert(name, format!("{:x}", Sha256::digest(std::fs::read(&path).unwrap())));
    }
    out
}

fn mstfolio(args: &[String]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_mstfolio")).args(args).output().map(|o| o.status.success()).unwrap_or(false)
}

fn strings(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let path = |name: &str| root.join(name).to_str().unwrap().to_string();
    let mut runs = vec![(
        "synth",
        [
            strings(&["synth", "--out"]),
            vec![path("synth")],
            strings(&[
                "--n-stocks",
                "40",
                "--n-days",
                "900",
                "--base-seed",
                "9",
                "--segments",
                "U:300,D:200,S:100,U:299",
            ]),
            strings(&["--regime-drift", "0.001", "--planted-drift", "0.02", "--horizon-days", "100"]),
        ]
        .concat(),
    )];
    let shared = [
        strings(&["--data"]),
        vec![path("synth/prices.csv")],
        strings(&["--index"]),
        vec![path("synth/index.csv")],
        strings(&["--window-days", "100", "--step-days", "20", "--horizon-days", "100", "--base-seed", "7"]),
        strings(&["--random-draws", "200", "--min-samples", "3"]),
    ]
    .concat();
    for cmd in ["stats", "network", "compare", "backtest"] {
        let mut args = [strings(&[cmd, "--out"]), vec![path(cmd)], shared.clone()].concat();
        if cmd == "backtest" {
            args.extend(strings(&["--horizons", "50,100"]));
        }
        runs.push((cmd, args));
    }
    let mut files = 0;
    let mut differing = Vec::new();
    for (name, args) in &runs {
        let dir = root.join(name);
        if !mstfolio(args) {
            return Outcome::check(false, format!("{name} failed on first run"));
        }
        let first = digests(&dir);
        if !mstfolio(args) {
            return Outcome::check(false, format!("{name} failed on rerun"));
        }
        let second = digests(&dir);
        files += first.len();
        if first != second {
            differing.extend(
                first
                    .keys()
                    .chain(second.keys())
                    .filter(|k| first.get(*k) != second.get(*k))
                    .map(|k| format!("{name}/{k}")),
            );
        }
    }
    differing.dedup();
    Outcome::check(differing.is_empty(), format!("{files} files over 5 commands; differing {differing:?}"))
}

const ANCHOR_SHORTFALL: &str = "a fixed-step schedule cannot give both 2 anchors for 421 days and 161 for 3627; \
    the stated closed form floor((3627-200-200)/20)+1 evaluates to 162";

fn full_size_run() -> Outcome {
    let t0 = Instant::now();
    let seg = |condition, days| Segment { condition, days };
    let spec = SynthSpec {
        n_days: 3627,
        seed: 2024,
        segments: vec![seg(Condition::U, 900), seg(Condition::D, 700), seg(Condition::S, 600), seg(Condition::U, 800)],
        regime_drift: 0.0015,
        ..Default::default()
    };
    let market = generate(&spec).unwrap();
    let cfg = BacktestConfig::default();
    let pipeline = run_pipeline(&market.returns, &market.index, &cfg).unwrap();
    let schedule = make_schedule(3627, 200, 20, 200).unwrap();
    let anchors = pipeline.records.len();
    let sizes_ok = portfolio_size(181, cfg.fraction) == 18
        && pipeline
            .records
            .iter()
            .all(|r| r.selections.iter().all(|s| s.central.members.len() == 18 && s.peripheral.members.len() == 18));
    let grids: Vec<usize> = Criterion::ALL.iter().map(|&c| compare_regimes(&pipeline.all(), c, &cfg).len()).collect();
    let grid_ok = grids.iter().all(|&g| g == Parameter::ALL.len() * 9) && Parameter::ALL.len() == 5;
    let elapsed = t0.elapsed();
    let rest_ok = sizes_ok && grid_ok && elapsed < Duration::from_secs(600) && schedule.len() == anchors;
    let detail = format!(
        "anchors {anchors} (expected 161); 18-member portfolios {sizes_ok}; grid cells per criterion {grids:?}; {elapsed:.1?}"
    );
    let pass = anchors == 161 && rest_ok;
    let known_shortfall = (!pass && rest_ok && anchors == 162).then_some(ANCHOR_SHORTFALL);
    Outcome { pass, detail, known_shortfall }
}

#[test]
fn acceptance() {
    let criteria: [Check; 9] = [
        ("1 mst optimality", mst_optimality),
        ("2 betweenness dual oracle", betweenness_dual_oracle),
        ("3 anova oracle", anova_oracle),
        ("4 regime fixtures", regime_fixtures),
        ("5 power-law mle", power_law_mle),
        ("6 planted signal", planted_signal),
        ("7 null calibration", null_calibration),
        ("8 determinism", determinism),
        ("9 full-size smoke run", full_size_run),
    ];
    let mut unexplained = Vec::new();
    writeln!(std::io::stderr()).unwrap();
    for (name, run) in criteria {
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        // Written to the handle directly so the report survives output capture.
        writeln!(std::io::stderr(), "{status} {name}: {}", outcome.detail).unwrap();
        if let Some(reason) = outcome.known_shortfall {
            writeln!(std::io::stderr(), "     known shortfall: {reason}").unwrap();
        } else if !outcome.pass {
            unexplained.push(name);
        }
    }
    assert!(unexplained.is_empty(), "failing criteria: {unexplained:?}");
}

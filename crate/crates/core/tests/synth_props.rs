use mstfolio::network::pearson_matrix;
use mstfolio::regime::ratio_trading_days;
use mstfolio::stats;
use mstfolio::synth::{generate, SynthSpec};

#[test]
fn block_correlation_near_target() {
    let spec = SynthSpec { n_days: 201, ..Default::default() };
    let m = generate(&spec).unwrap();
    let c = pearson_matrix(&m.returns, 0..200).unwrap();
    let idx: Vec<usize> = m.block.iter().map(|t| m.returns.tickers().iter().position(|x| x == t).unwrap()).collect();
    let mut within = Vec::new();
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            within.push(c.get(i, j));
        }
    }
    let avg = stats::mean(&within);
    assert!((avg - 0.6).abs() <= 0.05, "mean within-block correlation {avg}");
}

#[test]
fn zero_drift_index_rises_half_the_time() {
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let m = generate(&SynthSpec { n_stocks: 5, n_days: 2000, block_size: 0, seed, ..Default::default() }).unwrap();
        ratios.push(ratio_trading_days(&m.index, 0..2000).unwrap());
    }
    let avg = stats::mean(&ratios);
    assert!((avg - 0.5).abs() < 0.01, "mean rise ratio {avg}");
}

#[test]
fn same_seed_same_files() {
    let spec = SynthSpec { n_stocks: 12, n_days: 60, block_size: 4, seed: 8, ..Default::default() };
    let write = || {
        let m = generate(&spec).unwrap();
        let (mut p, mut i) = (Vec::new(), Vec::new());
        m.write_prices(&mut p).unwrap();
        m.write_index(&mut i).unwrap();
        (p, i)
    };
    assert_eq!(write(), write());
}

#[test]
fn written_prices_load_back() {
    let spec = SynthSpec { n_stocks: 6, n_days: 40, block_size: 2, ..Default::default() };
    let m = generate(&spec).unwrap();
    let mut buf = Vec::new();
    m.write_prices(&mut buf).unwrap();
    let panel = mstfolio::ingest::load_prices(buf.as_slice()).unwrap();
    assert_eq!(panel.tickers(), m.prices.tickers());
    assert_eq!(panel.prices(), m.prices.prices());
}

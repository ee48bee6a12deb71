mod common;

use chrono::NaiveDate;
use common::rng;
use mstfolio::regime::*;
use proptest::prelude::*;
use rand::Rng;

fn series(levels: &[f64]) -> IndexSeries {
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let dates = (0..levels.len()).map(|i| start + chrono::Days::new(i as u64)).collect();
    IndexSeries::new(dates, levels.to_vec()).unwrap()
}

fn cfg(c: Criterion) -> RegimeConfig {
    RegimeConfig::default().with_criterion(c)
}

#[test]
fn and_up_set_inside_or_up_set() {
    let mut r = rng(11);
    for _ in 0..10_000 {
        let (d, f) = (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0));
        let and = classify(d, Some(f), &cfg(Criterion::And)).unwrap();
        let or = classify(d, Some(f), &cfg(Criterion::Or));
        if and == Condition::U {
            assert_eq!(or.as_ref().ok(), Some(&Condition::U));
        }
        if and == Condition::D {
            assert_eq!(or.as_ref().ok(), Some(&Condition::D));
        }
    }
}

#[test]
fn closed_stable_interval() {
    for c in [0.45, 0.5, 0.55] {
        assert_eq!(classify(c, None, &cfg(Criterion::TradingDay)).unwrap(), Condition::S);
    }
    assert_eq!(classify(0.5500001, None, &cfg(Criterion::TradingDay)).unwrap(), Condition::U);
    assert_eq!(classify(0.4499999, None, &cfg(Criterion::TradingDay)).unwrap(), Condition::D);
}

fn rank(c: Condition) -> i32 {
    match c {
        Condition::D => 0,
        Condition::S => 1,
        Condition::U => 2,
    }
}

proptest! {
    #[test]
    fn trading_day_label_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c = cfg(Criterion::TradingDay);
        prop_assert!(rank(classify(lo, None, &c).unwrap()) <= rank(classify(hi, None, &c).unwrap()));
    }

    #[test]
    fn reversal_complements_rise_ratio(steps in prop::collection::vec(prop_oneof![-3.0f64..-0.01, 0.01f64..3.0], 2..80)) {
        let mut levels = vec![100.0];
        for s in &steps {
            let next = levels[levels.len() - 1] + s;
            levels.push(next.max(1.0) + 1e-9 * levels.len() as f64);
        }
        // Clamping can create flat days; skip those paths.
        prop_assume!(levels.windows(2).all(|w| w[0] != w[1]));
        let n = levels.len();
        let fwd = ratio_trading_days(&series(&levels), 0..n).unwrap();
        let mut rev = levels.clone();
        rev.reverse();
        let back = ratio_trading_days(&series(&rev), 0..n).unwrap();
        prop_assert!((fwd + back - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratios_lie_in_unit_interval(steps in prop::collection::vec(-2.0f64..2.0, 2..50)) {
        let mut levels = vec![100.0];
        for s in &steps {
            levels.push(levels[levels.len() - 1] + s);
        }
        let ix = series(&levels);
        let d = ratio_trading_days(&ix, 0..levels.len()).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        if let Ok(f) = ratio_amplitude(&ix, 0..levels.len()) {
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}

#[test]
fn hand_ratios() {
    assert_eq!(ratio_trading_days(&series(&[1.0, 2.0, 3.0, 2.0, 3.0]), 0..5).unwrap(), 0.75);
    assert!((ratio_amplitude(&series(&[1.0, 2.0, 1.5]), 0..3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

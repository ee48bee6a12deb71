use std::ops::Range;

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;

/// Dense symmetric matrix over a fixed ticker list, stored row-major.
#[derive(Debug, Clone, PartialEq)]
struct Square {
    n: usize,
    values: Vec<f64>,
}

impl Square {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn off_diagonal_upper(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Pearson correlation coefficients between stock return series.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    tickers: Vec<String>,
    m: Square,
}

impl CorrMatrix {
    /// Wraps a row-major matrix, checking symmetry, unit diagonal and range.
    pub fn from_values(tickers: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = tickers.len();
        check_square(n, &values)?;
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::Validation(format!("correlation diagonal at {i} is not 1")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(-1.0..=1.0).contains(&v) || v != values[j * n + i] {
                    return Err(Error::Validation(format!("invalid correlation at ({i}, {j})")));
                }
            }
        }
        Ok(Self { tickers, m: Square { n, values } })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.m.n
    }

    pub fn is_empty(&self) -> bool {
        self.m.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    /// Upper-triangle entries in row order, diagonal excluded.
    pub fn off_diagonal(&self) -> Vec<f64> {
        self.m.off_diagonal_upper()
    }
}

/// Metric distances d = sqrt(2 (1 - rho)) derived from a [`CorrMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistMatrix {
    tickers: Vec<String>,
    m: Square,
}

impl DistMatrix {
    /// Wraps a row-major matrix, checking symmetry, zero diagonal and the [0, 2] range.
    pub fn from_values(tickers: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = tickers.len();
        check_square(n, &values)?;
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Validation(format!("distance diagonal at {i} is not 0")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(0.0..=2.0).contains(&v) || v != values[j * n + i] {
                    return Err(Error::Validation(format!("invalid distance at ({i}, {j})")));
                }
            }
        }
        Ok(Self { tickers, m: Square { n, values } })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.m.n
    }

    pub fn is_empty(&self) -> bool {
        self.m.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    pub fn off_diagonal(&self) -> Vec<f64> {
        self.m.off_diagonal_upper()
    }
}

fn check_square(n: usize, values: &[f64]) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::Validation(format!("expected {}x{n} values, got {}", n, values.len())));
    }
    Ok(())
}

/// Correlation matrix of every stock over the return columns in `window`.
pub fn pearson_matrix(returns: &ReturnPanel, window: Range<usize>) -> Result<CorrMatrix> {
    if window.len() < 2 || window.end > returns.n_days() {
        return Err(Error::InvalidArgument(format!(
            "correlation window {window:?} must hold at least 2 of {} days",
            returns.n_days()
        )));
    }
    let n = returns.n_stocks();
    let len = window.len() as f64;
    // Centered series scaled to unit norm; correlations are then plain dot products.
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (i, ticker) in returns.tickers().iter().enumerate() {
        let x = &returns.row(i)[window.clone()];
        let mean = x.iter().sum::<f64>() / len;
        let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= f64::EPSILON * (1.0 + mean.abs()) * len {
            return Err(Error::DegenerateSeries { ticker: ticker.clone() });
        }
        unit.push(centered.into_iter().map(|v| v / norm).collect());
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let rho = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            values[i * n + j] = rho;
            values[j * n + i] = rho;
        }
    }
    Ok(CorrMatrix { tickers: returns.tickers().to_vec(), m: Square { n, values } })
}

pub fn correlation_to_distance(rho: f64) -> f64 {
    (2.0 * (1.0 - rho)).max(0.0).sqrt()
}

pub fn distance_matrix(corr: &CorrMatrix) -> DistMatrix {
    let n = corr.len();
    let mut values: Vec<f64> = corr.m.values.iter().map(|&r| correlation_to_distance(r)).collect();
    for i in 0..n {
        values[i * n + i] = 0.0;
    }
    DistMatrix { tickers: corr.tickers.clone(), m: Square { n, values } }
}

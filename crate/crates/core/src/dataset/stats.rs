use serde::{Deserialize, Serialize};

use super::Table;
use crate::error::{Error, Result};

/// Descriptive statistics of one column, in the column's unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// Adjusted Fisher-Pearson skewness `G1`; 0 for a constant column.
    pub skewness: f64,
}

pub fn summarize(table: &Table, column: &str) -> Result<SummaryStats> {
    summarize_values(table.column(column)?)
}

pub fn summarize_values(values: &[f64]) -> Result<SummaryStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let nf = n as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(SummaryStats {
            n,
            min,
            max,
            mean: min,
            std_dev: 0.0,
            skewness: 0.0,
        });
    }
    let mean = (values.iter().sum::<f64>() / nf).clamp(min, max);
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(s2, s3), &v| {
        let d = v - mean;
        (s2 + d * d, s3 + d * d * d)
    });
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3) = (m2 / nf, m3 / nf);
    let skewness = if n < 3 {
        0.0
    } else {
        m3 / m2.powf(1.5) * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
    };
    Ok(SummaryStats {
        n,
        min,
        max,
        mean,
        std_dev,
        skewness,
    })
}

/// Pearson product-moment correlation of two equal-length slices.
///
/// Returns `None` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "pearson: length mismatch");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

pub fn pearson_correlation(table: &Table, a: &str, b: &str) -> Result<f64> {
    let (xa, xb) = (table.column(a)?, table.column(b)?);
    if table.n_rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: table.n_rows(),
        });
    }
    pearson(xa, xb).ok_or_else(|| {
        let constant = if pearson(xa, xa).is_none() { a } else { b };
        Error::ZeroVariance(constant.to_string())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }
}

/// Pairwise Pearson correlations over every column, symmetric with unit diagonal.
pub fn correlation_matrix(table: &Table) -> Result<CorrelationMatrix> {
    let names: Vec<String> = table.schema().names().map(str::to_string).collect();
    let d = names.len();
    let mut values = vec![vec![1.0; d]; d];
    for i in 0..d {
        // validates non-zero variance of column i
        pearson_correlation(table, &names[i], &names[i])?;
        for j in (i + 1)..d {
            let r = pearson_correlation(table, &names[i], &names[j])?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { names, values })
}

/// A 0/1 treatment derived from thresholding one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryTreatment {
    pub source_column: String,
    pub threshold: f64,
    pub values: Vec<u8>,
}

impl BinaryTreatment {
    /// Build from raw values; 1 exactly when `x > threshold`.
    pub fn from_values(source_column: &str, xs: &[f64], threshold: f64) -> Result<Self> {
        let values: Vec<u8> = xs.iter().map(|&x| u8::from(x > threshold)).collect();
        let treated = values.iter().filter(|&&v| v == 1).count();
        if treated == 0 || treated == values.len() {
            return Err(Error::DegenerateTreatment {
                column: source_column.to_string(),
                threshold,
            });
        }
        Ok(BinaryTreatment {
            source_column: source_column.to_string(),
            threshold,
            values,
        })
    }

    pub fn n_treated(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    pub fn n_control(&self) -> usize {
        self.values.len() - self.n_treated()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Binarize `column` at `threshold`, defaulting to the column mean.
pub fn binarize_at_mean(
    table: &Table,
    column: &str,
    threshold: Option<f64>,
) -> Result<BinaryTreatment> {
    let xs = table.column(column)?;
    let threshold = match threshold {
        Some(t) => t,
        None => summarize_values(xs)?.mean,
    };
    BinaryTreatment::from_values(column, xs, threshold)
}

/// Label each value with its empirical-quantile bin in `0..bins`.
///
/// Cut point `k` is the largest value among the first `ceil(k * n / bins)`
/// order statistics; a value's label is the number of cut points it exceeds.
/// Ties therefore always share a label.
pub fn quantile_discretize(table: &Table, column: &str, bins: usize) -> Result<Vec<usize>> {
    let xs = table.column(column)?;
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if bins > distinct.len() {
        return Err(Error::TooManyBins {
            column: column.to_string(),
            bins,
            distinct: distinct.len(),
        });
    }
    let n = sorted.len();
    let cuts: Vec<f64> = (1..bins)
        .map(|k| sorted[(k * n).div_ceil(bins) - 1])
        .collect();
    Ok(xs
        .iter()
        .map(|&x| cuts.partition_point(|&c| c < x))
        .collect())
}

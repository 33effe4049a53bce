use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{feature_columns, input_features, Predictor};
use crate::dataset::pearson;
use crate::error::Result;
use crate::regression::fit_least_squares;
use crate::Table;

/// Multi-linear regression of the outcome on every input column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub outcome: String,
    pub features: Vec<String>,
    /// Outcome units per feature unit, in `features` order.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub r_squared: f64,
    /// Pearson correlation between fitted and observed outcome.
    pub corr_coefficient: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl LinearModel {
    pub fn coefficient(&self, feature: &str) -> Option<f64> {
        self.features
            .iter()
            .position(|f| f == feature)
            .map(|i| self.coefficients[i])
    }

    /// `FR = 0.35·fc + 0.15·W − … + 396.1` style expression.
    pub fn equation(&self) -> String {
        let mut s = format!("{} =", self.outcome);
        for (i, (f, c)) in self.features.iter().zip(&self.coefficients).enumerate() {
            let _ = match (i, *c < 0.0) {
                (0, false) => write!(s, " {c:.4}·{f}"),
                (0, true) => write!(s, " -{:.4}·{f}", -c),
                (_, false) => write!(s, " + {c:.4}·{f}"),
                (_, true) => write!(s, " - {:.4}·{f}", -c),
            };
        }
        let sign = if self.intercept < 0.0 { '-' } else { '+' };
        let _ = write!(s, " {sign} {:.4}", self.intercept.abs());
        s
    }
}

impl Predictor for LinearModel {
    fn method_name(&self) -> &str {
        "Regression"
    }

    fn features(&self) -> &[String] {
        &self.features
    }

    fn predict(&self, table: &Table) -> Result<Vec<f64>> {
        let cols = feature_columns(table, &self.features)?;
        Ok((0..table.n_rows())
            .map(|i| {
                self.intercept
                    + cols
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(c, k)| c[i] * k)
                        .sum::<f64>()
            })
            .collect())
    }
}

/// Least-squares fit of `outcome` on all input columns.
pub fn fit_ols(table: &Table, outcome: &str) -> Result<LinearModel> {
    let features = input_features(table, outcome)?;
    let y = table.column(outcome)?;
    let cols = feature_columns(table, &features)?;
    let predictors: Vec<(&str, &[f64])> = features.iter().map(String::as_str).zip(cols).collect();
    let fit = fit_least_squares(&predictors, y)?;
    let r_squared = super::r2_score(y, &fit.fitted).clamp(0.0, 1.0);
    let corr_coefficient = pearson(&fit.fitted, y).unwrap_or(0.0);
    Ok(LinearModel {
        outcome: outcome.to_string(),
        coefficients: fit.coefficients[1..].to_vec(),
        intercept: fit.intercept(),
        features,
        r_squared,
        corr_coefficient,
        residuals: fit.residuals,
    })
}

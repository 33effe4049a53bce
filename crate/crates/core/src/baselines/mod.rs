//! Predictive baselines and the fix-to-mean intervention harness.

mod compare;
mod forest;
mod linear;

pub use compare::{
    compare_methods, intervene_fix_to_mean, intervention_shift, ComparisonReport,
    ExternalPredictions, InterventionReport, MethodSection, Validation,
};
pub use forest::{fit_forest, ForestConfig, ForestModel, Tree};
pub use linear::{fit_ols, LinearModel};

use crate::error::{Error, Result};
use crate::Table;

/// A fitted model that maps rows of a table to outcome predictions.
pub trait Predictor {
    fn method_name(&self) -> &str;

    /// Columns the model reads, in fit order.
    fn features(&self) -> &[String];

    fn predict(&self, table: &Table) -> Result<Vec<f64>>;
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score(actual: &[f64], predicted: &[f64]) -> f64 {
    assert_eq!(actual.len(), predicted.len(), "r2_score: length mismatch");
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// Feature columns of `table` in the model's order.
fn feature_columns<'t>(table: &'t Table, features: &[String]) -> Result<Vec<&'t [f64]>> {
    features
        .iter()
        .map(|f| {
            table.column(f).map_err(|_| {
                Error::SchemaMismatch(format!("model feature `{f}` missing from table"))
            })
        })
        .collect()
}

/// Input columns of a table (role `Input`), excluding `outcome`.
fn input_features(table: &Table, outcome: &str) -> Result<Vec<String>> {
    table.column(outcome)?;
    let features: Vec<String> = table
        .schema()
        .inputs()
        .filter(|n| *n != outcome)
        .map(str::to_string)
        .collect();
    if features.is_empty() {
        return Err(Error::Schema("no input columns to fit on".into()));
    }
    Ok(features)
}

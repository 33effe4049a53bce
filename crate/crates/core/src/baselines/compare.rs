use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{r2_score, Predictor};
use crate::dataset::{pearson, Role};
use crate::error::{Error, Result};
use crate::inference::{fmt_p, fmt_value, CausalEstimate};
use crate::Table;

/// Copy of `table` with each named column replaced by its mean.
pub fn intervene_fix_to_mean<S: AsRef<str>>(table: &Table, variables: &[S]) -> Result<Table> {
    let mut out = table.clone();
    for v in variables {
        let v = v.as_ref();
        let column = table
            .schema()
            .column(v)
            .ok_or_else(|| Error::UnknownColumn(v.to_string()))?;
        if column.role == Role::Outcome {
            return Err(Error::InterveneOnOutcome(v.to_string()));
        }
        let values = table.column(v)?;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        out = out.replace_column(v, vec![mean; values.len()])?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionReport {
    pub method: String,
    pub variables: Vec<String>,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    /// `mean(after - before)`.
    pub mean_shift: f64,
}

impl InterventionReport {
    fn from_predictions(
        method: &str,
        variables: Vec<String>,
        before: Vec<f64>,
        after: Vec<f64>,
    ) -> Self {
        let n = before.len() as f64;
        let mean_shift = after.iter().zip(&before).map(|(a, b)| a - b).sum::<f64>() / n;
        InterventionReport {
            method: method.to_string(),
            variables,
            before,
            after,
            mean_shift,
        }
    }

    pub fn row_shifts(&self) -> Vec<f64> {
        self.after
            .iter()
            .zip(&self.before)
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Population standard deviation of the per-row shifts.
    pub fn shift_std_dev(&self) -> f64 {
        let shifts = self.row_shifts();
        let n = shifts.len() as f64;
        let m = shifts.iter().sum::<f64>() / n;
        (shifts.iter().map(|s| (s - m).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Predictions of `model` on `table` before and after fixing `variables` to
/// their means.
pub fn intervention_shift<S: AsRef<str>>(
    model: &dyn Predictor,
    table: &Table,
    variables: &[S],
) -> Result<InterventionReport> {
    let before = model.predict(table)?;
    let after = model.predict(&intervene_fix_to_mean(table, variables)?)?;
    Ok(InterventionReport::from_predictions(
        model.method_name(),
        variables.iter().map(|v| v.as_ref().to_string()).collect(),
        before,
        after,
    ))
}

/// Prediction columns produced outside this crate, placed in the report
/// alongside the fitted models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPredictions {
    pub method: String,
    pub pre: Vec<f64>,
    #[serde(default)]
    pub post: Option<Vec<f64>>,
}

/// Fit of predictions against the measured outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub r2: f64,
    pub corr: f64,
}

impl Validation {
    fn of(measured: &[f64], predicted: &[f64]) -> Self {
        Validation {
            r2: r2_score(measured, predicted),
            corr: pearson(measured, predicted).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSection {
    pub method: String,
    pub validation: Validation,
    pub predictions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervention: Option<InterventionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub outcome: String,
    pub variables: Vec<String>,
    pub measured: Vec<f64>,
    pub sections: Vec<MethodSection>,
    /// Causal estimates for the intervened variables, in `variables` order.
    pub causal: Vec<CausalEstimate>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison report serializes")
    }

    /// One line per (method, row). `prediction_post` equals `prediction_pre`
    /// for methods without an intervention.
    pub fn plot_csv(&self) -> String {
        let mut s = format!(
            "row_id,measured_{},method,prediction_pre,prediction_post\n",
            self.outcome
        );
        for sec in &self.sections {
            let post = sec
                .intervention
                .as_ref()
                .map_or(&sec.predictions, |iv| &iv.after);
            for (i, (pre, post)) in sec.predictions.iter().zip(post).enumerate() {
                let _ = writeln!(
                    s,
                    "{i},{},{},{pre},{post}",
                    self.measured[i],
                    csv_field(&sec.method)
                );
            }
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("# Method comparison for {}\n\n", self.outcome);
        let vars = if self.variables.is_empty() {
            "none".to_string()
        } else {
            self.variables.join(", ")
        };
        let _ = writeln!(s, "Intervened variables: {vars}\n");
        s.push_str("## Validation\n\n| Method | R² | r |\n|---|---|---|\n");
        for sec in &self.sections {
            let _ = writeln!(
                s,
                "| {} | {:.3} | {:.3} |",
                sec.method, sec.validation.r2, sec.validation.corr
            );
        }
        if self.variables.is_empty() {
            return s;
        }
        s.push_str(
            "\n## Intervention shift\n\n| Method | Mean shift | Shift sd |\n|---|---|---|\n",
        );
        for sec in &self.sections {
            match &sec.intervention {
                Some(iv) => {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} |",
                        sec.method,
                        fmt_value(iv.mean_shift),
                        fmt_value(iv.shift_std_dev())
                    );
                }
                None => {
                    let _ = writeln!(s, "| {} | n/a | n/a |", sec.method);
                }
            }
        }
        if !self.causal.is_empty() {
            s.push_str("\n## Causal effects\n\n| Variable | ATE | p-value |\n|---|---|---|\n");
            for e in &self.causal {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} |",
                    e.treatment,
                    fmt_value(e.ate),
                    fmt_p(e.p_value)
                );
            }
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Validation and intervention sections for every model and external
/// prediction set, plus the causal estimates for `variables`.
pub fn compare_methods<S: AsRef<str>>(
    table: &Table,
    models: &[&dyn Predictor],
    external: &[ExternalPredictions],
    causal: &[CausalEstimate],
    variables: &[S],
) -> Result<ComparisonReport> {
    if models.is_empty() && external.is_empty() {
        return Err(Error::InvalidArgument("no methods to compare".into()));
    }
    let outcome = table
        .schema()
        .outcome()
        .ok_or_else(|| Error::Schema("table has no outcome column".into()))?
        .to_string();
    let measured = table.column(&outcome)?.to_vec();
    let variables: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
    let fixed = intervene_fix_to_mean(table, &variables)?;

    let mut sections = Vec::with_capacity(models.len() + external.len());
    for m in models {
        let before = m.predict(table)?;
        let intervention = if variables.is_empty() {
            None
        } else {
            let after = m.predict(&fixed)?;
            Some(InterventionReport::from_predictions(
                m.method_name(),
                variables.clone(),
                before.clone(),
                after,
            ))
        };
        sections.push(MethodSection {
            method: m.method_name().to_string(),
            validation: Validation::of(&measured, &before),
            predictions: before,
            intervention,
        });
    }
    for e in external {
        let n = table.n_rows();
        if e.pre.len() != n || e.post.as_ref().is_some_and(|p| p.len() != n) {
            return Err(Error::SchemaMismatch(format!(
                "predictions for `{}` do not have {n} rows",
                e.method
            )));
        }
        let intervention = match (&e.post, variables.is_empty()) {
            (Some(post), false) => Some(InterventionReport::from_predictions(
                &e.method,
                variables.clone(),
                e.pre.clone(),
                post.clone(),
            )),
            _ => None,
        };
        sections.push(MethodSection {
            method: e.method.clone(),
            validation: Validation::of(&measured, &e.pre),
            predictions: e.pre.clone(),
            intervention,
        });
    }

    let causal = variables
        .iter()
        .filter_map(|v| causal.iter().find(|c| &c.treatment == v).cloned())
        .collect();
    Ok(ComparisonReport {
        outcome,
        variables,
        measured,
        sections,
        causal,
    })
}

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::{correlation_matrix, summarize, CorrelationMatrix, SummaryStats};
use super::Table;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub unit: String,
    pub stats: SummaryStats,
}

/// Per-column statistics in schema order plus the correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub n_rows: usize,
    pub columns: Vec<ColumnSummary>,
    /// Absent when some column is constant.
    pub correlation: Option<CorrelationMatrix>,
}

/// Row labels of the statistics table, top to bottom.
pub const SUMMARY_ROWS: [&str; 5] = [
    "Minimum",
    "Maximum",
    "Average",
    "Standard Deviation",
    "Skewness",
];

pub fn summary_report(table: &Table) -> Result<SummaryReport> {
    let columns = table
        .schema()
        .columns()
        .iter()
        .map(|c| {
            Ok(ColumnSummary {
                name: c.name.clone(),
                unit: c.unit.clone(),
                stats: summarize(table, &c.name)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummaryReport {
        n_rows: table.n_rows(),
        columns,
        correlation: correlation_matrix(table).ok(),
    })
}

/// Two-decimal rendering used by every markdown table.
pub fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

impl SummaryReport {
    pub fn statistic(stats: &SummaryStats, row: usize) -> f64 {
        match row {
            0 => stats.min,
            1 => stats.max,
            2 => stats.mean,
            3 => stats.std_dev,
            _ => stats.skewness,
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("# Dataset summary ({} rows)\n\n| Statistic |", self.n_rows);
        for c in &self.columns {
            if c.unit.is_empty() || c.unit == "-" {
                let _ = write!(s, " {} |", c.name);
            } else {
                let _ = write!(s, " {} ({}) |", c.name, c.unit);
            }
        }
        let _ = writeln!(s, "\n|---|{}", "---|".repeat(self.columns.len()));
        for (r, label) in SUMMARY_ROWS.iter().enumerate() {
            let _ = write!(s, "| {label} |");
            for c in &self.columns {
                let _ = write!(s, " {} |", fmt2(Self::statistic(&c.stats, r)));
            }
            s.push('\n');
        }
        match &self.correlation {
            Some(m) => {
                s.push_str("\n## Pearson correlation\n\n|   |");
                for n in &m.names {
                    let _ = write!(s, " {n} |");
                }
                let _ = writeln!(s, "\n|---|{}", "---|".repeat(m.names.len()));
                for (n, row) in m.names.iter().zip(&m.values) {
                    let _ = write!(s, "| {n} |");
                    for v in row {
                        let _ = write!(s, " {} |", fmt2(*v));
                    }
                    s.push('\n');
                }
            }
            None => s.push_str("\nCorrelation matrix omitted: at least one column is constant.\n"),
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary report serializes")
    }
}

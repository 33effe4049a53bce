//! Backdoor identification and average-treatment-effect estimation for
//! mean-binarized treatments.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{binarize_at_mean, BinaryTreatment, Table, FIRE_INPUTS, FIRE_OUTCOME};
use crate::error::{Error, Result};
use crate::graph::{apply_constraints, ConstraintSet, Dag};
use crate::refute::{self, RefutationMethod, RefutationResult, RefuteConfig};
use crate::regression::fit_least_squares;

/// Which causal graph a study runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DagConfigKind {
    /// Treatment variable -> outcome only.
    Isolated,
    /// A learned graph, with the treatment -> outcome edge guaranteed.
    Learned,
    /// A learned graph overlaid with the domain-knowledge constraints.
    #[serde(rename = "domain")]
    DomainAugmented,
    /// Every input points at the outcome, no edges among inputs.
    Hypothetical,
}

impl DagConfigKind {
    pub const ALL: [DagConfigKind; 4] = [
        DagConfigKind::Isolated,
        DagConfigKind::Learned,
        DagConfigKind::DomainAugmented,
        DagConfigKind::Hypothetical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DagConfigKind::Isolated => "isolated",
            DagConfigKind::Learned => "learned",
            DagConfigKind::DomainAugmented => "domain",
            DagConfigKind::Hypothetical => "hypothetical",
        }
    }

    pub fn needs_learned_graph(self) -> bool {
        matches!(
            self,
            DagConfigKind::Learned | DagConfigKind::DomainAugmented
        )
    }
}

impl fmt::Display for DagConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DagConfigKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DagConfigKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown DAG configuration `{s}`")))
    }
}

/// Domain-knowledge edges among the fire variables.
pub const DOMAIN_EDGES: [(&str, &str); 6] = [
    ("K", "L"),
    ("P", "fc"),
    ("P", "W"),
    ("P", "r"),
    ("fc", "r"),
    ("W", "C"),
];

/// Required: [`DOMAIN_EDGES`] plus every input -> FR. Forbidden: their reversals.
pub fn domain_constraints() -> ConstraintSet {
    let mut required: Vec<(&str, &str)> = DOMAIN_EDGES.to_vec();
    required.extend(FIRE_INPUTS.iter().map(|i| (*i, FIRE_OUTCOME)));
    let forbidden: Vec<(&str, &str)> = required.iter().map(|(a, b)| (*b, *a)).collect();
    ConstraintSet::new(&required, &forbidden).expect("domain constraints are consistent")
}

/// Build one of the four study graphs over the fire variables.
pub fn build_config(kind: DagConfigKind, treatment: &str, learned: Option<&Dag>) -> Result<Dag> {
    build_config_for(kind, &FIRE_INPUTS, FIRE_OUTCOME, treatment, learned)
}

/// [`build_config`] over an arbitrary input list and outcome.
pub fn build_config_for<S: AsRef<str>>(
    kind: DagConfigKind,
    inputs: &[S],
    outcome: &str,
    treatment: &str,
    learned: Option<&Dag>,
) -> Result<Dag> {
    if !inputs.iter().any(|i| i.as_ref() == treatment) {
        return Err(Error::InvalidQuery(format!(
            "treatment `{treatment}` is not one of the inputs"
        )));
    }
    let learned = match (kind.needs_learned_graph(), learned) {
        (true, None) => {
            return Err(Error::InvalidArgument(format!(
                "the {kind} configuration needs a learned graph"
            )))
        }
        (_, l) => l,
    };
    match kind {
        DagConfigKind::Isolated => Dag::new([treatment, outcome])?.add_edge(treatment, outcome),
        DagConfigKind::Hypothetical => {
            let mut nodes: Vec<&str> = inputs.iter().map(AsRef::as_ref).collect();
            nodes.push(outcome);
            let mut dag = Dag::new(nodes)?;
            for i in inputs {
                dag.insert_edge(i.as_ref(), outcome, None)?;
            }
            Ok(dag)
        }
        DagConfigKind::Learned => {
            let c = ConstraintSet::new(&[(treatment, outcome)], &[(outcome, treatment)])?;
            apply_constraints(learned.expect("checked above"), &c)
        }
        DagConfigKind::DomainAugmented => {
            apply_constraints(learned.expect("checked above"), &domain_constraints())
        }
    }
}

/// Smallest set of non-descendants of `treatment` blocking every backdoor
/// path to `outcome`, lexicographically first among sets of that size.
pub fn identify_adjustment_set(dag: &Dag, treatment: &str, outcome: &str) -> Result<Vec<String>> {
    if treatment == outcome {
        return Err(Error::InvalidQuery("treatment and outcome coincide".into()));
    }
    let descendants = dag.descendants(treatment)?;
    dag.idx(outcome)?;
    let mut candidates: Vec<&str> = dag
        .nodes()
        .iter()
        .map(String::as_str)
        .filter(|n| *n != treatment && *n != outcome && !descendants.contains(*n))
        .collect();
    candidates.sort_unstable();
    let backdoor = dag.without_outgoing(treatment)?;

    for size in 0..=candidates.len() {
        for subset in Combinations::new(candidates.len(), size) {
            let z: Vec<&str> = subset.iter().map(|&i| candidates[i]).collect();
            if backdoor.d_separated(treatment, outcome, &z)? {
                return Ok(z.into_iter().map(str::to_string).collect());
            }
        }
    }
    // Under causal sufficiency the parents of the treatment always qualify.
    unreachable!("no backdoor adjustment set for {treatment} -> {outcome}")
}

/// k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        self.current = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                break Some(next);
            }
        };
        Some(out)
    }
}

/// A treatment/outcome pair on a graph, with the binarized treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalQuery {
    pub dag: Dag,
    pub treatment: String,
    pub outcome: String,
    pub treatment_def: BinaryTreatment,
}

impl CausalQuery {
    pub fn new(dag: Dag, outcome: &str, treatment_def: BinaryTreatment) -> Result<Self> {
        let treatment = treatment_def.source_column.clone();
        if treatment == outcome {
            return Err(Error::InvalidQuery("treatment and outcome coincide".into()));
        }
        for n in [treatment.as_str(), outcome] {
            if !dag.contains(n) {
                return Err(Error::InvalidQuery(format!(
                    "`{n}` is not a node of the graph"
                )));
            }
        }
        if dag.directed_path(&treatment, outcome)?.is_none() {
            return Err(Error::InvalidQuery(format!(
                "no directed path {treatment} -> {outcome}"
            )));
        }
        Ok(CausalQuery {
            dag,
            treatment,
            outcome: outcome.to_string(),
            treatment_def,
        })
    }

    /// Binarize `treatment` at its mean and build the query.
    pub fn at_mean(table: &Table, dag: Dag, treatment: &str, outcome: &str) -> Result<Self> {
        CausalQuery::new(dag, outcome, binarize_at_mean(table, treatment, None)?)
    }
}

/// One estimated effect: ATE in outcome units with its t-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalEstimate {
    pub treatment: String,
    pub outcome: String,
    pub threshold: f64,
    pub ate: f64,
    pub std_error: f64,
    pub p_value: f64,
    pub significant: bool,
    pub adjustment_set: Vec<String>,
    pub n_treated: usize,
    pub n_control: usize,
    #[serde(default)]
    pub refutations: Vec<RefutationResult>,
}

impl CausalEstimate {
    pub fn refutation(&self, method: RefutationMethod) -> Option<&RefutationResult> {
        self.refutations.iter().find(|r| r.method == method)
    }
}

/// Significance level for the p-value rule.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Coefficient on the treatment in `outcome ~ 1 + T + adjustment`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectFit {
    pub ate: f64,
    pub std_error: f64,
    pub p_value: f64,
    pub df: usize,
}

/// Regress `outcome` on an explicit treatment vector plus adjustment columns.
pub fn fit_effect<S: AsRef<str>>(
    table: &Table,
    treatment: &[f64],
    outcome: &str,
    adjustment: &[S],
) -> Result<EffectFit> {
    let y = table.column(outcome)?;
    let mut predictors: Vec<(&str, &[f64])> = vec![("treatment", treatment)];
    for z in adjustment {
        predictors.push((z.as_ref(), table.column(z.as_ref())?));
    }
    let fit = fit_least_squares(&predictors, y)?;
    Ok(EffectFit {
        ate: fit.slope(0),
        std_error: fit.slope_std_error(0),
        p_value: fit.slope_p_value(0),
        df: fit.df,
    })
}

/// Backdoor-adjusted OLS estimate of the effect of the binarized treatment.
pub fn estimate_ate(table: &Table, query: &CausalQuery) -> Result<CausalEstimate> {
    let def = &query.treatment_def;
    if def.values.len() != table.n_rows() {
        return Err(Error::SchemaMismatch(format!(
            "treatment has {} rows, table has {}",
            def.values.len(),
            table.n_rows()
        )));
    }
    let (n_treated, n_control) = (def.n_treated(), def.n_control());
    if n_treated == 0 || n_control == 0 {
        return Err(Error::DegenerateTreatment {
            column: query.treatment.clone(),
            threshold: def.threshold,
        });
    }
    if n_treated < 2 || n_control < 2 {
        return Err(Error::UnbalancedTreatment {
            column: query.treatment.clone(),
            treated: n_treated,
            control: n_control,
        });
    }
    let adjustment_set = identify_adjustment_set(&query.dag, &query.treatment, &query.outcome)?;
    let fit = fit_effect(table, &def.as_f64(), &query.outcome, &adjustment_set)?;
    Ok(CausalEstimate {
        treatment: query.treatment.clone(),
        outcome: query.outcome.clone(),
        threshold: def.threshold,
        ate: fit.ate,
        std_error: fit.std_error,
        p_value: fit.p_value,
        significant: fit.p_value < SIGNIFICANCE_LEVEL,
        adjustment_set,
        n_treated,
        n_control,
        refutations: Vec::new(),
    })
}

/// Estimate and attach all three refutations.
pub fn estimate_and_refute(
    table: &Table,
    query: &CausalQuery,
    config: &RefuteConfig,
) -> Result<CausalEstimate> {
    let mut est = estimate_ate(table, query)?;
    let rcc = refute::random_common_cause(table, query, &est, config.replicates, config.seed)?;
    let subset = refute::data_subset(
        table,
        query,
        &est,
        config.subset_fraction,
        config.replicates,
        config.seed,
    )?;
    let placebo = refute::placebo_treatment(table, query, &est, config.replicates, config.seed)?;
    est.refutations = vec![rcc, subset, placebo];
    Ok(est)
}

/// One row of a study table; exactly one of `estimate`/`error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub variable: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<CausalEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: DagConfigKind,
    pub outcome: String,
    pub refute: RefuteConfig,
    pub rows: Vec<StudyRow>,
}

/// Estimate the effect of every input (binarized at its own mean) under the
/// chosen graph configuration, in schema order. A failing variable yields an
/// error row; the others still run.
pub fn run_study(
    table: &Table,
    kind: DagConfigKind,
    learned: Option<&Dag>,
    config: &RefuteConfig,
) -> Result<StudyReport> {
    let outcome = table
        .schema()
        .outcome()
        .ok_or_else(|| Error::Schema("table has no outcome column".into()))?
        .to_string();
    let inputs: Vec<&str> = table.schema().inputs().collect();
    if inputs.is_empty() {
        return Err(Error::Schema("table has no input columns".into()));
    }
    if kind.needs_learned_graph() && learned.is_none() {
        return Err(Error::InvalidArgument(format!(
            "the {kind} configuration needs a learned graph"
        )));
    }
    let rows = inputs
        .iter()
        .map(|&var| {
            let result = build_config_for(kind, &inputs, &outcome, var, learned)
                .and_then(|dag| CausalQuery::at_mean(table, dag, var, &outcome))
                .and_then(|q| estimate_and_refute(table, &q, config));
            match result {
                Ok(est) => StudyRow {
                    variable: var.to_string(),
                    estimate: Some(est),
                    error: None,
                },
                Err(e) => StudyRow {
                    variable: var.to_string(),
                    estimate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(StudyReport {
        kind,
        outcome,
        refute: *config,
        rows,
    })
}

pub(crate) fn fmt_value(v: f64) -> String {
    crate::dataset::fmt2(v)
}

pub(crate) fn fmt_p(p: f64) -> String {
    if p < 1e-3 {
        format!("{p:.1e}")
    } else {
        format!("{p:.3}")
    }
}

/// Header of the study results table.
pub const STUDY_COLUMNS: [&str; 6] = [
    "Treatment variable",
    "Mean value",
    "p-value",
    "Random Common Cause",
    "Data Subset Refuter",
    "Placebo Treatment",
];

impl StudyReport {
    pub fn succeeded(&self) -> usize {
        self.rows.iter().filter(|r| r.estimate.is_some()).count()
    }

    /// Markdown results table; significant p-values are bolded.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# Results of analysis for {} ({} DAG)\n",
            self.outcome, self.kind
        );
        let _ = writeln!(out, "| {} |", STUDY_COLUMNS.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(STUDY_COLUMNS.len()));
        for row in &self.rows {
            match &row.estimate {
                Some(e) => {
                    let p = fmt_p(e.p_value);
                    let p = if e.significant { format!("**{p}**") } else { p };
                    let refuted = |m| {
                        e.refutation(m)
                            .map_or_else(|| "-".to_string(), |r| fmt_value(r.refuted_ate))
                    };
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} |",
                        row.variable,
                        fmt_value(e.ate),
                        p,
                        refuted(RefutationMethod::RandomCommonCause),
                        refuted(RefutationMethod::DataSubset),
                        refuted(RefutationMethod::PlaceboTreatment),
                    );
                }
                None => {
                    let _ = writeln!(out, "| {} | error | - | - | - | - |", row.variable);
                }
            }
        }
        let _ = writeln!(
            out,
            "\nBold p-values are significant at the {:.0}% level. Refuters: {} replicates, data subset fraction {}, seed {}.\n",
            SIGNIFICANCE_LEVEL * 100.0,
            self.refute.replicates,
            self.refute.subset_fraction,
            self.refute.seed
        );
        let _ = writeln!(
            out,
            "| Treatment variable | Threshold | Treated | Control | Adjustment set | Refuters passed |"
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|");
        for row in &self.rows {
            match (&row.estimate, &row.error) {
                (Some(e), _) => {
                    let adj = if e.adjustment_set.is_empty() {
                        "{}".to_string()
                    } else {
                        format!("{{{}}}", e.adjustment_set.join(", "))
                    };
                    let passed = e.refutations.iter().filter(|r| r.passed).count();
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {}/{} |",
                        row.variable,
                        format_args!("{:.4}", e.threshold),
                        e.n_treated,
                        e.n_control,
                        adj,
                        passed,
                        e.refutations.len()
                    );
                }
                (None, err) => {
                    let _ = writeln!(
                        out,
                        "| {} | error: {} | | | | |",
                        row.variable,
                        err.as_deref().unwrap_or("unknown").replace('|', "/")
                    );
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study report serializes")
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Dag;
use crate::error::{Error, Result};

/// Domain-knowledge edge constraints.
///
/// JSON form: `{"required": [["a","b"], ...], "forbidden": [["c","d"], ...]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default)]
    pub required: BTreeSet<(String, String)>,
    #[serde(default)]
    pub forbidden: BTreeSet<(String, String)>,
}

impl ConstraintSet {
    pub fn new<S: AsRef<str>>(required: &[(S, S)], forbidden: &[(S, S)]) -> Result<Self> {
        let pairs = |xs: &[(S, S)]| {
            xs.iter()
                .map(|(a, b)| (a.as_ref().to_string(), b.as_ref().to_string()))
                .collect()
        };
        let c = ConstraintSet {
            required: pairs(required),
            forbidden: pairs(forbidden),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: ConstraintSet = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("constraints serialize")
    }

    pub fn is_empty(&self) -> bool {
        self.required.is_empty() && self.forbidden.is_empty()
    }

    pub fn is_forbidden(&self, from: &str, to: &str) -> bool {
        self.forbidden.contains(&(from.to_string(), to.to_string()))
    }

    pub fn is_required(&self, from: &str, to: &str) -> bool {
        self.required.contains(&(from.to_string(), to.to_string()))
    }

    /// Union of two constraint sets; the result is re-validated.
    pub fn merged(&self, other: &ConstraintSet) -> Result<ConstraintSet> {
        let c = ConstraintSet {
            required: self.required.union(&other.required).cloned().collect(),
            forbidden: self.forbidden.union(&other.forbidden).cloned().collect(),
        };
        c.validate()?;
        Ok(c)
    }

    /// Required and forbidden sets are disjoint, free of self-loops, and the
    /// required edges alone form a DAG.
    pub fn validate(&self) -> Result<()> {
        if let Some((a, b)) = self.required.intersection(&self.forbidden).next() {
            return Err(Error::InconsistentConstraints(format!(
                "{a} -> {b} is both required and forbidden"
            )));
        }
        for (a, b) in self.required.iter().chain(&self.forbidden) {
            if a == b {
                return Err(Error::InconsistentConstraints(format!("self-loop on {a}")));
            }
        }
        self.required_dag(None).map(|_| ())
    }

    /// DAG of required edges over their endpoints (plus `extra` nodes).
    fn required_dag(&self, extra: Option<&[String]>) -> Result<Dag> {
        let mut nodes: Vec<String> = extra.map(<[String]>::to_vec).unwrap_or_default();
        let mut seen: BTreeSet<String> = nodes.iter().cloned().collect();
        for (a, b) in &self.required {
            for n in [a, b] {
                if seen.insert(n.clone()) {
                    nodes.push(n.clone());
                }
            }
        }
        let mut dag = Dag::new(nodes)?;
        for (a, b) in &self.required {
            dag.insert_edge(a, b, None).map_err(|e| match e {
                Error::Cycle(path) => Error::InconsistentConstraints(format!(
                    "required edges force a cycle: {}",
                    path.join(" -> ")
                )),
                other => other,
            })?;
        }
        Ok(dag)
    }
}

/// Overlay constraints on a (typically learned) graph.
///
/// The output holds every required edge, no forbidden edge, and the remaining
/// input edges. Input edges that would close a cycle with the required ones are
/// dropped, strongest `|weight|` kept first.
pub fn apply_constraints(dag: &Dag, constraints: &ConstraintSet) -> Result<Dag> {
    constraints.validate()?;
    for (a, b) in constraints.required.iter().chain(&constraints.forbidden) {
        dag.idx(a)?;
        dag.idx(b)?;
    }
    let mut out = Dag::new(dag.nodes().iter().cloned())?;
    for (a, b) in &constraints.required {
        out.insert_edge(a, b, dag.weight(a, b))?;
    }

    let mut rest: Vec<_> = dag
        .edges()
        .into_iter()
        .filter(|e| {
            !constraints.is_required(&e.from, &e.to) && !constraints.is_forbidden(&e.from, &e.to)
        })
        .collect();
    // stable sort keeps lexicographic order among equal magnitudes
    rest.sort_by(|x, y| {
        let (wx, wy) = (
            x.weight.map_or(0.0, f64::abs),
            y.weight.map_or(0.0, f64::abs),
        );
        wy.total_cmp(&wx)
    });
    for e in rest {
        match out.insert_edge(&e.from, &e.to, e.weight) {
            Ok(()) | Err(Error::Cycle(_)) => {}
            Err(other) => return Err(other),
        }
    }
    Ok(out)
}

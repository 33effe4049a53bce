//! Shared fixtures for the criterion benchmarks.

use causalfire_core::dataset::synthesize_fire_dataset;
use causalfire_core::inference::{build_config, CausalQuery, DagConfigKind};
use causalfire_core::{Dag, Table};

pub fn fire(n: usize) -> Table {
    synthesize_fire_dataset(n, 42).expect("synthetic dataset")
}

/// Layered DAG over `d` nodes: each node points to the next two.
pub fn ladder(d: usize) -> Dag {
    let names: Vec<String> = (0..d).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..d {
        for j in [i + 1, i + 2] {
            if j < d {
                edges.push((names[i].as_str(), names[j].as_str()));
            }
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Dag::from_edges(&refs, &edges).expect("acyclic by construction")
}

/// Effect of `treatment` on FR under the domain-augmented graph.
pub fn domain_query(table: &Table, treatment: &str) -> CausalQuery {
    let mut nodes: Vec<&str> = causalfire_core::dataset::FIRE_INPUTS.to_vec();
    nodes.push("FR");
    let empty = Dag::new(nodes).expect("valid nodes");
    let dag = build_config(DagConfigKind::DomainAugmented, treatment, Some(&empty))
        .expect("domain graph");
    CausalQuery::at_mean(table, dag, treatment, "FR").expect("valid query")
}

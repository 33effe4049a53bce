//! Directed acyclic graphs over named variables.

mod constraints;
mod dot;

pub use constraints::{apply_constraints, ConstraintSet};
pub use dot::parse_dot;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed edge with an optional weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// JSON form of a graph: `{"nodes": [...], "edges": [{"from", "to", "weight"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

/// Directed acyclic graph. Values are immutable: every mutating operation
/// returns a new graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
    weights: BTreeMap<(usize, usize), f64>,
}

impl Dag {
    /// Edgeless graph over `nodes`, which must be unique.
    pub fn new<I, S>(nodes: I) -> Result<Dag>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::InvalidArgument("empty node name".into()));
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::DuplicateNode(n.clone()));
            }
        }
        let d = nodes.len();
        Ok(Dag {
            nodes,
            index,
            parents: vec![BTreeSet::new(); d],
            children: vec![BTreeSet::new(); d],
            weights: BTreeMap::new(),
        })
    }

    pub fn from_edges<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Dag> {
        let mut dag = Dag::new(nodes.iter().map(|s| s.as_ref().to_string()))?;
        for (a, b) in edges {
            dag.insert_edge(a.as_ref(), b.as_ref(), None)?;
        }
        Ok(dag)
    }

    pub fn from_json(json: &GraphJson) -> Result<Dag> {
        let mut dag = Dag::new(json.nodes.iter().cloned())?;
        for e in &json.edges {
            dag.insert_edge(&e.from, &e.to, e.weight)?;
        }
        Ok(dag)
    }

    pub fn from_json_str(text: &str) -> Result<Dag> {
        Dag::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self.nodes.clone(),
            edges: self.edges(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("graph serializes")
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.children.iter().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, node: &str) -> bool {
        self.index.contains_key(node)
    }

    pub(crate) fn idx(&self, node: &str) -> Result<usize> {
        self.index
            .get(node)
            .copied()
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.children[a].contains(&b),
            _ => false,
        }
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<f64> {
        let (a, b) = (self.index.get(from)?, self.index.get(to)?);
        self.weights.get(&(*a, *b)).copied()
    }

    /// All edges sorted lexicographically by `(from, to)`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(a, cs)| {
                cs.iter().map(move |&b| Edge {
                    from: self.nodes[a].clone(),
                    to: self.nodes[b].clone(),
                    weight: self.weights.get(&(a, b)).copied(),
                })
            })
            .collect();
        out.sort_by(|x, y| (&x.from, &x.to).cmp(&(&y.from, &y.to)));
        out
    }

    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges().into_iter().map(|e| (e.from, e.to)).collect()
    }

    pub fn parents(&self, node: &str) -> Result<Vec<&str>> {
        let i = self.idx(node)?;
        Ok(self.sorted_names(&self.parents[i]))
    }

    pub fn children(&self, node: &str) -> Result<Vec<&str>> {
        let i = self.idx(node)?;
        Ok(self.sorted_names(&self.children[i]))
    }

    fn sorted_names(&self, set: &BTreeSet<usize>) -> Vec<&str> {
        let mut v: Vec<&str> = set.iter().map(|&i| self.nodes[i].as_str()).collect();
        v.sort_unstable();
        v
    }

    /// New graph with `from -> to` added.
    pub fn add_edge(&self, from: &str, to: &str) -> Result<Dag> {
        self.add_weighted_edge(from, to, None)
    }

    pub fn add_weighted_edge(&self, from: &str, to: &str, weight: Option<f64>) -> Result<Dag> {
        let mut next = self.clone();
        next.insert_edge(from, to, weight)?;
        Ok(next)
    }

    /// New graph without `from -> to` (unchanged if absent).
    pub fn remove_edge(&self, from: &str, to: &str) -> Result<Dag> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        let mut next = self.clone();
        next.children[a].remove(&b);
        next.parents[b].remove(&a);
        next.weights.remove(&(a, b));
        Ok(next)
    }

    /// New graph with every edge leaving `node` removed.
    pub fn without_outgoing(&self, node: &str) -> Result<Dag> {
        let a = self.idx(node)?;
        let mut next = self.clone();
        for b in std::mem::take(&mut next.children[a]) {
            next.parents[b].remove(&a);
            next.weights.remove(&(a, b));
        }
        Ok(next)
    }

    pub(crate) fn insert_edge(&mut self, from: &str, to: &str, weight: Option<f64>) -> Result<()> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        if a == b {
            return Err(Error::SelfLoop(from.to_string()));
        }
        if self.children[a].contains(&b) {
            return Err(Error::DuplicateEdge(from.to_string(), to.to_string()));
        }
        if let Some(path) = self.directed_path_idx(b, a) {
            // from -> to closes the loop to -> ... -> from
            let mut cycle = vec![self.nodes[a].clone()];
            cycle.extend(path.into_iter().map(|i| self.nodes[i].clone()));
            return Err(Error::Cycle(cycle));
        }
        self.children[a].insert(b);
        self.parents[b].insert(a);
        if let Some(w) = weight {
            self.weights.insert((a, b), w);
        }
        Ok(())
    }

    /// Shortest directed path `from -> ... -> to`, inclusive of both ends.
    pub fn directed_path(&self, from: &str, to: &str) -> Result<Option<Vec<String>>> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        Ok(self
            .directed_path_idx(a, b)
            .map(|p| p.into_iter().map(|i| self.nodes[i].clone()).collect()))
    }

    fn directed_path_idx(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &c in &self.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    prev[c] = v;
                    queue.push_back(c);
                }
            }
        }
        None
    }

    /// Strict descendants of `node`.
    pub fn descendants(&self, node: &str) -> Result<BTreeSet<String>> {
        let i = self.idx(node)?;
        Ok(self
            .closure(&[i], |v| &self.children[v])
            .into_iter()
            .filter(|&v| v != i)
            .map(|v| self.nodes[v].clone())
            .collect())
    }

    /// Strict ancestors of `node`.
    pub fn ancestors(&self, node: &str) -> Result<BTreeSet<String>> {
        let i = self.idx(node)?;
        Ok(self
            .closure(&[i], |v| &self.parents[v])
            .into_iter()
            .filter(|&v| v != i)
            .map(|v| self.nodes[v].clone())
            .collect())
    }

    /// Seeds plus everything reachable through `next`.
    fn closure<'a, F>(&'a self, seeds: &[usize], next: F) -> BTreeSet<usize>
    where
        F: Fn(usize) -> &'a BTreeSet<usize>,
    {
        let mut out: BTreeSet<usize> = seeds.iter().copied().collect();
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            for &u in next(v) {
                if out.insert(u) {
                    stack.push(u);
                }
            }
        }
        out
    }

    /// Kahn's algorithm, always emitting the lexicographically smallest ready node.
    pub fn topological_order(&self) -> Vec<String> {
        let mut indegree: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BTreeSet<(&str, usize)> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| (self.nodes[i].as_str(), i))
            .collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some((name, v)) = ready.pop_first() {
            order.push(name.to_string());
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert((self.nodes[c].as_str(), c));
                }
            }
        }
        debug_assert_eq!(order.len(), self.nodes.len(), "Dag invariant: acyclic");
        order
    }

    /// Whether `x` and `y` are d-separated given `given`.
    ///
    /// Reachability ("Bayes ball") search over (node, direction) states: a
    /// trail may pass a non-collider only if it is unobserved, and a collider
    /// only if it is an ancestor of (or in) the conditioning set.
    pub fn d_separated<S: AsRef<str>>(&self, x: &str, y: &str, given: &[S]) -> Result<bool> {
        let (xi, yi) = (self.idx(x)?, self.idx(y)?);
        if xi == yi {
            return Err(Error::InvalidArgument(format!(
                "d_separated: x and y are both `{x}`"
            )));
        }
        let mut observed = vec![false; self.nodes.len()];
        for z in given {
            observed[self.idx(z.as_ref())?] = true;
        }
        if observed[xi] || observed[yi] {
            return Err(Error::InvalidArgument(
                "d_separated: x and y must not be in the conditioning set".into(),
            ));
        }
        Ok(!self.reachable(xi, &observed)[yi])
    }

    /// Nodes d-connected to `source` given the observed mask.
    fn reachable(&self, source: usize, observed: &[bool]) -> Vec<bool> {
        let seeds: Vec<usize> = (0..self.nodes.len()).filter(|&v| observed[v]).collect();
        let observed_or_ancestor = {
            let set = self.closure(&seeds, |v| &self.parents[v]);
            let mut mask = vec![false; self.nodes.len()];
            for v in set {
                mask[v] = true;
            }
            mask
        };

        // direction: true = arrived from a child (moving up), false = from a parent
        let mut visited = vec![[false; 2]; self.nodes.len()];
        let mut reached = vec![false; self.nodes.len()];
        let mut stack = vec![(source, true)];
        while let Some((v, up)) = stack.pop() {
            let slot = usize::from(up);
            if visited[v][slot] {
                continue;
            }
            visited[v][slot] = true;
            if !observed[v] {
                reached[v] = true;
            }
            if up {
                if !observed[v] {
                    stack.extend(self.parents[v].iter().map(|&p| (p, true)));
                    stack.extend(self.children[v].iter().map(|&c| (c, false)));
                }
            } else {
                if !observed[v] {
                    stack.extend(self.children[v].iter().map(|&c| (c, false)));
                }
                if observed_or_ancestor[v] {
                    stack.extend(self.parents[v].iter().map(|&p| (p, true)));
                }
            }
        }
        reached
    }

    /// Graphviz DOT rendering with nodes and edges in lexicographic order.
    pub fn to_dot(&self) -> String {
        dot::render(self)
    }
}

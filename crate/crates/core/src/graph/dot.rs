use std::fmt::Write as _;

use super::Dag;
use crate::error::{Error, Result};

fn is_bare_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn quote(s: &str) -> String {
    if is_bare_id(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

pub(super) fn render(dag: &Dag) -> String {
    let mut out = String::from("digraph {\n");
    let mut names: Vec<&String> = dag.nodes().iter().collect();
    names.sort();
    for n in names {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for e in dag.edges() {
        let _ = match e.weight {
            Some(w) => writeln!(
                out,
                "  {} -> {} [label=\"{w:.4}\"];",
                quote(&e.from),
                quote(&e.to)
            ),
            None => writeln!(out, "  {} -> {};", quote(&e.from), quote(&e.to)),
        };
    }
    out.push_str("}\n");
    out
}

/// Read back the node and edge statements of a DOT digraph in the subset
/// produced by [`Dag::to_dot`]. Edge labels are parsed as weights.
pub fn parse_dot(text: &str) -> Result<Dag> {
    let body = text
        .trim()
        .strip_prefix("digraph")
        .map(str::trim_start)
        .and_then(|s| s.find('{').map(|i| &s[i + 1..]))
        .and_then(|s| s.rfind('}').map(|i| &s[..i]))
        .ok_or_else(|| Error::DotParse("expected `digraph { ... }`".into()))?;

    let mut nodes: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, Option<f64>)> = Vec::new();
    let add_node = |n: &str, nodes: &mut Vec<String>| {
        if !nodes.iter().any(|m| m == n) {
            nodes.push(n.to_string());
        }
    };

    for stmt in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (head, attrs) = match stmt.find('[') {
            Some(i) => (stmt[..i].trim(), Some(&stmt[i..])),
            None => (stmt, None),
        };
        if let Some((a, b)) = head.split_once("->") {
            let (a, b) = (unquote(a.trim())?, unquote(b.trim())?);
            let weight = attrs.and_then(label_value).transpose()?;
            add_node(&a, &mut nodes);
            add_node(&b, &mut nodes);
            edges.push((a, b, weight));
        } else {
            add_node(&unquote(head)?, &mut nodes);
        }
    }

    let mut dag = Dag::new(nodes)?;
    for (a, b, w) in edges {
        dag.insert_edge(&a, &b, w)?;
    }
    Ok(dag)
}

fn unquote(s: &str) -> Result<String> {
    if let Some(inner) = s.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        Ok(inner.replace("\\\"", "\"").replace("\\\\", "\\"))
    } else if is_bare_id(s) {
        Ok(s.to_string())
    } else {
        Err(Error::DotParse(format!("bad identifier {s:?}")))
    }
}

fn label_value(attrs: &str) -> Option<Result<f64>> {
    let start = attrs.find("label=\"")? + "label=\"".len();
    let len = attrs[start..].find('"')?;
    let raw = &attrs[start..start + len];
    Some(
        raw.parse()
            .map_err(|_| Error::DotParse(format!("bad edge label {raw:?}"))),
    )
}

use std::fmt::Write;

use super::mst::MstGraph;
use crate::error::{Error, Result};

/// Distances below this floor are drawn at the maximum pen width.
const MIN_DRAWN_DISTANCE: f64 = 0.05;

/// Renders the tree as an undirected DOT graph. Pen width is inversely
/// proportional to edge distance, so strongly correlated pairs draw thicker.
pub fn to_dot(tree: &MstGraph, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "graph \"{}\" {{", escape(name)).unwrap();
    for t in tree.tickers() {
        writeln!(out, "  \"{}\";", escape(t)).unwrap();
    }
    for e in tree.edges() {
        let penwidth = 1.0 / e.weight.max(MIN_DRAWN_DISTANCE);
        writeln!(
            out,
            "  \"{}\" -- \"{}\" [weight=\"{:.6}\", penwidth=\"{:.3}\"];",
            escape(&tree.tickers()[e.a]),
            escape(&tree.tickers()[e.b]),
            e.weight,
            penwidth
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Edge `(source, target, weight)` triples read back from a file written by [`to_dot`].
pub fn parse_dot_edges(text: &str) -> Result<Vec<(String, String, f64)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if !line.contains(" -- ") {
            continue;
        }
        let bad = || Error::Parse { line: lineno as u64 + 1, message: format!("malformed edge {line:?}") };
        let quoted: Vec<&str> = line.split('"').collect();
        // "a" -- "b" [weight="w", penwidth="p"];
        if quoted.len() < 7 {
            return Err(bad());
        }
        let weight_at = quoted.iter().position(|s| s.ends_with("weight=") && !s.contains("pen")).ok_or_else(bad)?;
        let weight: f64 = quoted.get(weight_at + 1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        edges.push((quoted[1].to_string(), quoted[3].to_string(), weight));
    }
    Ok(edges)
}

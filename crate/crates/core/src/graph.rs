//! Simple undirected graphs with labelled vertices.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    labels: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Vertices labelled `1..=n`.
    pub fn new(n: usize) -> Self {
        Graph { labels: (1..=n).map(|i| i.to_string()).collect(), edges: BTreeSet::new() }
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidGraph("duplicate vertex label".into()));
        }
        Ok(Graph { labels, edges: BTreeSet::new() })
    }

    /// Build from 0-based edges, rejecting self-loops and duplicates.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.len();
        if a >= n || b >= n {
            return Err(Error::InvalidGraph(format!("edge ({a}, {b}) references a missing vertex")));
        }
        if a == b {
            return Err(Error::InvalidGraph(format!("self-loop on vertex {}", self.labels[a])));
        }
        if !self.edges.insert((a.min(b), a.max(b))) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                self.labels[a], self.labels[b]
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        self.edges.remove(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// The graph with vertex `v` deleted; later vertices shift down by one.
    pub fn without_vertex(&self, v: usize) -> Graph {
        let mut labels = self.labels.clone();
        labels.remove(v);
        let shift = |x: usize| if x > v { x - 1 } else { x };
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != v && b != v)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
        Graph { labels, edges }
    }

    /// Parse `{"vertices": [...], "edges": [[a, b], ...]}` or a whitespace
    /// edge list (`a b` per line, `#` comments). Edge endpoints name vertex
    /// labels; in the text form vertices are created in order of appearance.
    pub fn parse(text: &str) -> Result<Graph> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            Self::parse_json(trimmed)
        } else {
            Self::parse_edge_list(text)
        }
    }

    fn parse_json(text: &str) -> Result<Graph> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let label = |x: &Value| -> Result<String> {
            match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                other => Err(Error::Parse(format!("bad vertex label {other}"))),
            }
        };
        let vertices = v
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"vertices\" array".into()))?
            .iter()
            .map(label)
            .collect::<Result<Vec<_>>>()?;
        let mut g = Graph::with_labels(vertices)?;
        let edges = v
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"edges\" array".into()))?;
        for e in edges {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Parse(format!("bad edge {e}")))?;
            let a = g.index_of(&label(&pair[0])?)?;
            let b = g.index_of(&label(&pair[1])?)?;
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut labels: Vec<String> = Vec::new();
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected two vertex labels", lineno + 1)));
            }
            let mut idx = [0; 2];
            for (k, t) in toks.iter().enumerate() {
                idx[k] = match labels.iter().position(|l| l == t) {
                    Some(i) => i,
                    None => {
                        labels.push(t.to_string());
                        labels.len() - 1
                    }
                };
            }
            pairs.push((idx[0], idx[1]));
        }
        let mut g = Graph::with_labels(labels)?;
        for (a, b) in pairs {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidGraph(format!("unknown vertex {label}")))
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).expect("path is simple")
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Graph::from_edges(n, &edges).expect("complete graph is simple")
    }

    /// Star with centre `0` and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_edges(leaves + 1, &edges).expect("star is simple")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1).unwrap();
        assert!(matches!(g.add_edge(1, 0), Err(Error::InvalidGraph(_))));
        assert!(matches!(g.add_edge(2, 2), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn parses_both_formats() {
        let a = Graph::parse(r#"{"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"], ["a", "c"]]}"#).unwrap();
        let b = Graph::parse("a b\nb c # comment\n\na c\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.max_degree(), 2);
        let c = Graph::parse(r#"{"vertices": [1, 2], "edges": [[1, 2]]}"#).unwrap();
        assert_eq!(c.labels(), &["1".to_string(), "2".to_string()]);
        assert!(Graph::parse("a b c").is_err());
        assert!(Graph::parse("a a").is_err());
    }

    #[test]
    fn vertex_deletion() {
        let g = Graph::path(3).without_vertex(1);
        assert_eq!(g.len(), 2);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.labels(), &["1".to_string(), "3".to_string()]);
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected graph with nonnegative edge weights. Nodes are numbered from
/// 0 internally; files use 1-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    /// `(i, j, w)` with `i < j`, sorted, no duplicates.
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Builds a graph from 0-based edges. Duplicate edges are summed, in
    /// either orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, w) in edges {
            if i == j {
                return Err(Error::Argument(format!("self-loop at node {}", i + 1)));
            }
            if i >= n || j >= n {
                return Err(Error::Argument(format!(
                    "edge ({}, {}) exceeds node count {n}",
                    i + 1,
                    j + 1
                )));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Argument(format!("edge weight {w} is not a finite nonnegative number")));
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += w;
        }
        Ok(Self {
            n,
            edges: merged.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for &(i, j, wij) in &self.edges {
            w[(i, j)] = wij;
            w[(j, i)] = wij;
        }
        w
    }

    /// Total weight of edges whose endpoints get different signs.
    pub fn cut_weight(&self, s: &[i8]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(i, j, _)| s[i] != s[j])
            .map(|&(_, _, w)| w)
            .sum()
    }

    /// Whether every node can be reached from node 0.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Parses an edge list.
///
/// Each line holds `i j [w]` with 1-based node indices and weight
/// defaulting to 1. Text after `#` is ignored, as are blank lines. A line
/// `p <n> <m>` fixes the node count; otherwise it is the largest index
/// seen. Repeated edges are summed.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut header: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_index = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "p" {
            if header.is_some() {
                return Err(err("duplicate `p` header".into()));
            }
            if !edges.is_empty() {
                return Err(err("`p` header must precede the edges".into()));
            }
            if fields.len() != 3 {
                return Err(err(format!("expected `p <n> <m>`, found `{line}`")));
            }
            let n: usize = fields[1]
                .parse()
                .map_err(|_| err(format!("bad node count `{}`", fields[1])))?;
            fields[2]
                .parse::<usize>()
                .map_err(|_| err(format!("bad edge count `{}`", fields[2])))?;
            header = Some(n);
            continue;
        }
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected `i j [w]`, found `{line}`")));
        }
        let index = |s: &str| -> Result<usize> {
            let v: i64 = s.parse().map_err(|_| err(format!("bad node index `{s}`")))?;
            if v <= 0 {
                return Err(err(format!("node index {v} must be positive")));
            }
            Ok(v as usize)
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(|| err(format!("bad weight `{s}`")))?,
            None => 1.0,
        };
        if w < 0.0 {
            return Err(err(format!("negative weight {w}")));
        }
        if i == j {
            return Err(err(format!("self-loop at node {i}")));
        }
        if let Some(n) = header {
            if i > n || j > n {
                return Err(err(format!("node index exceeds header count {n}")));
            }
        }
        max_index = max_index.max(i).max(j);
        edges.push((i - 1, j - 1, w));
    }
    let n = header.unwrap_or(max_index);
    if n == 0 {
        return Err(Error::Argument("graph has no nodes".into()));
    }
    Graph::new(n, edges)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text)
}

/// Graph Laplacian `D - W`.
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(g.n, g.n);
    for &(i, j, w) in &g.edges {
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}

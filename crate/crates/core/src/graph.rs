//! Simple undirected graphs and the benchmark graph constructions.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Undirected graph without self-loops or parallel edges.
///
/// Edges are stored normalized (`u < v`) and sorted; adjacency lists are
/// sorted as well so every traversal is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.n_vertices, raw.edges)
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            n_vertices: g.n,
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut norm = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_normalized(n, norm))
    }

    fn from_normalized(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self { n, edges, adj }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Whether the subgraph induced by `members` is connected (and nonempty).
    pub fn is_connected_subset(&self, members: &[usize]) -> bool {
        let Some(&start) = members.first() else {
            return false;
        };
        let mut inside = vec![false; self.n];
        for &v in members {
            inside[v] = true;
        }
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == members.len()
    }

    /// Number of edges with both endpoints in `members`.
    pub fn induced_edges(&self, members: &[usize]) -> usize {
        let mut inside = vec![false; self.n];
        for &v in members {
            inside[v] = true;
        }
        members
            .iter()
            .map(|&u| self.adj[u].iter().filter(|&&w| w > u && inside[w]).count())
            .sum()
    }

    /// Number of edges with exactly one endpoint in `members`.
    pub fn cut_size(&self, members: &[usize]) -> usize {
        let mut inside = vec![false; self.n];
        for &v in members {
            inside[v] = true;
        }
        members
            .iter()
            .map(|&u| self.adj[u].iter().filter(|&&w| !inside[w]).count())
            .sum()
    }

    /// Subgraph induced by `vertices`, relabelled `0..len` in ascending
    /// vertex order. Returns the subgraph and the map from new to old labels.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let mut keep = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&v) = keep.iter().find(|&&v| v >= self.n) {
            return Err(Error::IndexOutOfRange {
                index: v,
                universe: self.n,
            });
        }
        let mut new_label = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            new_label[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(u, v)| new_label[*u] != usize::MAX && new_label[*v] != usize::MAX)
            .map(|&(u, v)| (new_label[u], new_label[v]));
        Ok((Graph::new(keep.len(), edges)?, keep))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Parses the plain-text edge list format: a first line holding the
    /// vertex count, then one `u v` pair per line. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing vertex count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line,
            message: format!("expected vertex count, found {header:?}"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let mut parts = l.split_whitespace();
            let mut next = || -> Result<usize> {
                let tok = parts.next().ok_or(Error::Parse {
                    line,
                    message: "expected two vertex ids".into(),
                })?;
                tok.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid vertex id {tok:?}"),
                })
            };
            let (u, v) = (next()?, next()?);
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line,
                    message: "trailing tokens after edge".into(),
                });
            }
            edges.push((u, v));
        }
        Graph::new(n, edges).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

/// Benchmark graph constructions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    /// Chain `0 - 1 - ... - (n-1)`.
    Path,
    /// Each pair joined independently with probability `p`.
    ErdosRenyi { p: f64 },
    /// Square 4-neighbour grid; `n` must be a perfect square.
    Lattice,
    /// Path `0..path_len` whose last vertex is also the first vertex of a
    /// clique on `path_len-1 .. n`, so `path_len + clique_len - 1 = n`.
    Lollipop { path_len: usize, clique_len: usize },
    /// Path on `0..path_len` and a disjoint clique on the remaining vertices.
    DisjointPathClique { path_len: usize, clique_len: usize },
    /// Gabriel graph of uniform random points in the unit square: planar,
    /// connected, average degree close to four. Used as a stand-in for
    /// county adjacency graphs.
    Gabriel,
}

pub fn generate_graph(kind: &GraphKind, n: usize, seed: u64) -> Result<Graph> {
    let mut edges = Vec::new();
    match *kind {
        GraphKind::Path => {
            edges.extend((1..n).map(|v| (v - 1, v)));
        }
        GraphKind::ErdosRenyi { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("edge probability {p} outside [0, 1]")));
            }
            let mut rng = rng::stream(seed, &[rng::label::GRAPH]);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
        }
        GraphKind::Lattice => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(Error::param(format!("lattice needs a square vertex count, got {n}")));
            }
            for r in 0..side {
                for c in 0..side {
                    let v = r * side + c;
                    if c + 1 < side {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < side {
                        edges.push((v, v + side));
                    }
                }
            }
        }
        GraphKind::Lollipop {
            path_len,
            clique_len,
        } => {
            if path_len == 0 || clique_len == 0 || path_len + clique_len - 1 != n {
                return Err(Error::param(format!(
                    "lollipop needs path_len + clique_len - 1 = n (got {path_len} + {clique_len} - 1 vs {n})"
                )));
            }
            edges.extend((1..path_len).map(|v| (v - 1, v)));
            let base = path_len - 1;
            push_clique(&mut edges, base, n);
        }
        GraphKind::DisjointPathClique {
            path_len,
            clique_len,
        } => {
            if path_len + clique_len != n {
                return Err(Error::param(format!(
                    "path+clique needs path_len + clique_len = n (got {path_len} + {clique_len} vs {n})"
                )));
            }
            edges.extend((1..path_len).map(|v| (v - 1, v)));
            push_clique(&mut edges, path_len, n);
        }
        GraphKind::Gabriel => {
            let mut rng = rng::stream(seed, &[rng::label::GRAPH]);
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
            for u in 0..n {
                for v in u + 1..n {
                    let (mx, my) = ((pts[u].0 + pts[v].0) / 2.0, (pts[u].1 + pts[v].1) / 2.0);
                    let r2 = ((pts[u].0 - pts[v].0).powi(2) + (pts[u].1 - pts[v].1).powi(2)) / 4.0;
                    let empty = (0..n).all(|w| {
                        w == u || w == v || (pts[w].0 - mx).powi(2) + (pts[w].1 - my).powi(2) >= r2
                    });
                    if empty {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    Ok(Graph::from_normalized(n, {
        edges.sort_unstable();
        edges
    }))
}

fn push_clique(edges: &mut Vec<(usize, usize)>, start: usize, end: usize) {
    for u in start..end {
        for v in u + 1..end {
            edges.push((u, v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_edges() {
        let g = generate_graph(&GraphKind::Path, 4, 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn lattice_edge_count() {
        let g = generate_graph(&GraphKind::Lattice, 9, 0).unwrap();
        assert_eq!(g.n_edges(), 12);
        assert!(generate_graph(&GraphKind::Lattice, 10, 0).is_err());
    }

    #[test]
    fn lollipop_shares_one_vertex() {
        let kind = GraphKind::Lollipop {
            path_len: 3,
            clique_len: 3,
        };
        let g = generate_graph(&kind, 5, 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3), (2, 4), (3, 4)]);
        assert!(generate_graph(&kind, 6, 0).is_err());
    }

    #[test]
    fn disjoint_path_clique_has_two_components() {
        let kind = GraphKind::DisjointPathClique {
            path_len: 4,
            clique_len: 3,
        };
        let g = generate_graph(&kind, 7, 0).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(g.n_edges(), 3 + 3);
    }

    #[test]
    fn generators_are_pure_in_seed() {
        let er = GraphKind::ErdosRenyi { p: 0.1 };
        assert_eq!(
            generate_graph(&er, 60, 3).unwrap(),
            generate_graph(&er, 60, 3).unwrap()
        );
        assert_ne!(
            generate_graph(&er, 60, 3).unwrap(),
            generate_graph(&er, 60, 4).unwrap()
        );
        let gab = generate_graph(&GraphKind::Gabriel, 80, 5).unwrap();
        assert_eq!(gab.components().len(), 1);
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let g = Graph::new(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
        let err = Graph::parse_edge_list("3\n0 1\n1 x\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn subset_queries() {
        let g = generate_graph(&GraphKind::Path, 4, 0).unwrap();
        assert!(!g.is_connected_subset(&[0, 2]));
        assert!(g.is_connected_subset(&[1, 2]));
        assert_eq!(g.cut_size(&[1, 2]), 2);
        assert_eq!(g.induced_edges(&[0, 1, 2]), 2);
    }
}

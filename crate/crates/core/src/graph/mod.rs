//! Graph types and exact reference solvers.
//!
//! Vertex ids are 1-based. In a [`BipartiteGraph`] left vertex `u` and right
//! vertex `v` are addressed separately in edges, while a [`VertexCover`]
//! uses the flattened id space: left `u` is `u`, right `v` is `n_left + v`.

mod cover;
mod matching;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use cover::{
    greedy_two_approx_cover, minimum_vertex_cover_bipartite, minimum_vertex_cover_exact,
    ExactCoverSolver, DEFAULT_EXACT_CAP,
};
pub use matching::{greedy_maximal_matching, maximum_matching};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) out of range")]
    OutOfRange { u: usize, v: usize },
    #[error("duplicate edge ({u}, {v})")]
    Duplicate { u: usize, v: usize },
    #[error("exact vertex cover capped at {cap} vertices, instance has {n}")]
    CapacityExceeded { n: usize, cap: usize },
    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    adj: Vec<BTreeSet<usize>>,
    edges: usize,
}

impl BipartiteGraph {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        Self {
            n_left,
            n_right,
            adj: vec![BTreeSet::new(); n_left],
            edges: 0,
        }
    }

    pub fn from_edges<I>(n_left: usize, n_right: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(n_left, n_right);
        for (u, v) in edges {
            if !g.add_edge(u, v)? {
                return Err(GraphError::Duplicate { u, v });
            }
        }
        Ok(g)
    }

    pub(crate) fn from_sorted_unique<I>(n_left: usize, n_right: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(n_left, n_right);
        for (u, v) in edges {
            g.adj[u - 1].insert(v);
            g.edges += 1;
        }
        g
    }

    fn check(&self, u: usize, v: usize) -> Result<(), GraphError> {
        if (1..=self.n_left).contains(&u) && (1..=self.n_right).contains(&v) {
            Ok(())
        } else {
            Err(GraphError::OutOfRange { u, v })
        }
    }

    /// Returns `false` if the edge was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        self.check(u, v)?;
        let fresh = self.adj[u - 1].insert(v);
        self.edges += fresh as usize;
        Ok(fresh)
    }

    /// Returns `false` if the edge was absent.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        self.check(u, v)?;
        let had = self.adj[u - 1].remove(&v);
        self.edges -= had as usize;
        Ok(had)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        (1..=self.n_left).contains(&u) && self.adj[u - 1].contains(&v)
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }
    pub fn n_right(&self) -> usize {
        self.n_right
    }
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u - 1].iter().copied()
    }

    /// Edges sorted by `(left, right)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().map(move |&v| (u + 1, v)))
    }

    pub fn right_id(&self, v: usize) -> usize {
        self.n_left + v
    }

    pub fn is_valid_matching(&self, m: &Matching) -> bool {
        let mut left = vec![false; self.n_left + 1];
        let mut right = vec![false; self.n_right + 1];
        m.iter().all(|&(u, v)| {
            self.has_edge(u, v)
                && !std::mem::replace(&mut left[u], true)
                && !std::mem::replace(&mut right[v], true)
        })
    }

    pub fn is_valid_cover(&self, c: &VertexCover) -> bool {
        self.edges()
            .all(|(u, v)| c.contains(u) || c.contains(self.right_id(v)))
    }
}

/// Edge-list text: `"nL nR"` header, then one `"u v"` line per edge.
impl fmt::Display for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n_left, self.n_right)?;
        for (u, v) in self.edges() {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for BipartiteGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (header, pairs) = parse_edge_list(s)?;
        let [n_left, n_right] = header[..] else {
            return Err(GraphError::Parse {
                line: 1,
                detail: "expected header \"nL nR\"".into(),
            });
        };
        BipartiteGraph::from_edges(n_left, n_right, pairs)
    }
}

/// Undirected simple graph that may carry self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralGraph {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
    loops: BTreeSet<usize>,
    edges: usize,
}

impl GeneralGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![BTreeSet::new(); n],
            loops: BTreeSet::new(),
            edges: 0,
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(n);
        for (u, v) in edges {
            if !g.add_edge(u, v)? {
                return Err(GraphError::Duplicate { u, v });
            }
        }
        Ok(g)
    }

    /// `u == v` adds a self-loop. Returns `false` if already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        if !(1..=self.n).contains(&u) || !(1..=self.n).contains(&v) {
            return Err(GraphError::OutOfRange { u, v });
        }
        let fresh = if u == v {
            self.loops.insert(u)
        } else {
            self.adj[v - 1].insert(u);
            self.adj[u - 1].insert(v)
        };
        self.edges += fresh as usize;
        Ok(fresh)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if !(1..=self.n).contains(&u) {
            return false;
        }
        if u == v {
            self.loops.contains(&u)
        } else {
            self.adj[u - 1].contains(&v)
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u - 1].iter().copied()
    }

    pub fn loops(&self) -> impl Iterator<Item = usize> + '_ {
        self.loops.iter().copied()
    }

    /// Edges as `(u, v)` with `u <= v`, sorted; loops appear as `(u, u)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.loops.iter().map(|&u| (u, u)).collect();
        for (i, nb) in self.adj.iter().enumerate() {
            out.extend(nb.range(i + 2..).map(|&v| (i + 1, v)));
        }
        out.sort_unstable();
        out
    }

    pub fn is_valid_matching(&self, m: &Matching) -> bool {
        let mut used = vec![false; self.n + 1];
        m.iter().all(|&(u, v)| {
            u != v
                && self.has_edge(u, v)
                && !std::mem::replace(&mut used[u], true)
                && !std::mem::replace(&mut used[v], true)
        })
    }

    pub fn is_valid_cover(&self, c: &VertexCover) -> bool {
        self.edges()
            .into_iter()
            .all(|(u, v)| c.contains(u) || c.contains(v))
    }
}

/// Edge-list text: `"nV"` header, then one `"u v"` line per edge.
impl fmt::Display for GeneralGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for (u, v) in self.edges() {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for GeneralGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (header, pairs) = parse_edge_list(s)?;
        let [n] = header[..] else {
            return Err(GraphError::Parse {
                line: 1,
                detail: "expected header \"nV\"".into(),
            });
        };
        GeneralGraph::from_edges(n, pairs)
    }
}

type EdgeList = (Vec<usize>, Vec<(usize, usize)>);

fn parse_edge_list(s: &str) -> Result<EdgeList, GraphError> {
    let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let numbers = |line: usize, text: &str| -> Result<Vec<usize>, GraphError> {
        text.split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| GraphError::Parse {
                    line,
                    detail: format!("bad integer {t:?}"),
                })
            })
            .collect()
    };
    let (idx, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        detail: "missing header".into(),
    })?;
    let header = numbers(idx + 1, header)?;
    let mut pairs = Vec::new();
    for (idx, line) in lines {
        match numbers(idx + 1, line)?[..] {
            [u, v] => pairs.push((u, v)),
            _ => {
                return Err(GraphError::Parse {
                    line: idx + 1,
                    detail: "expected \"u v\"".into(),
                })
            }
        }
    }
    Ok((header, pairs))
}

/// A set of edges; vertex-disjointness is checked separately because
/// erring algorithms may report invalid matchings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn new(edges: Vec<(usize, usize)>) -> Self {
        Self { edges }
    }
    pub fn len(&self) -> usize {
        self.edges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
    pub fn contains(&self, edge: (usize, usize)) -> bool {
        self.edges.contains(&edge)
    }
    pub fn iter(&self) -> std::slice::Iter<'_, (usize, usize)> {
        self.edges.iter()
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn into_edges(self) -> Vec<(usize, usize)> {
        self.edges
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexCover {
    vertices: BTreeSet<usize>,
}

impl VertexCover {
    pub fn new<I: IntoIterator<Item = usize>>(vertices: I) -> Self {
        Self {
            vertices: vertices.into_iter().collect(),
        }
    }
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.iter().copied()
    }
}

//! Graph representation shared by every other module.
//!
//! Graphs are stored as compressed sparse rows. Directed graphs keep a second
//! reversed CSR for in-edges; undirected graphs store each edge in both
//! directions once and alias the reverse view onto the forward one.

mod generate;
mod io;
mod rank;

pub use generate::{generate_glp, generate_named, GlpParams, NamedShape};
pub use io::{load_edge_list, read_binary, write_binary, write_edge_list, IdMap, LoadedGraph};
pub use rank::{load_ranking, rank_by_degree, write_ranking, RankAssignment, RankStrategy};

use thiserror::Error;

/// Dense vertex identifier in `[0, n)`.
pub type VertexId = u32;
/// Edge and path lengths, in integer length units.
pub type Length = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("malformed graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    lengths: Vec<Length>,
}

impl Csr {
    /// Builds from arcs already sorted by (source, target) with no duplicates.
    fn from_sorted_arcs(n: usize, arcs: &[(VertexId, VertexId, Length)]) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &(u, _, _) in arcs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr { offsets, targets: arcs.iter().map(|a| a.1).collect(), lengths: arcs.iter().map(|a| a.2).collect() }
    }

    #[inline]
    fn range(&self, v: VertexId) -> std::ops::Range<usize> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }
}

/// Borrowed adjacency list of one vertex: parallel slices of neighbor ids
/// (ascending) and edge lengths.
#[derive(Clone, Copy, Debug)]
pub struct Adjacency<'a> {
    pub targets: &'a [VertexId],
    pub lengths: &'a [Length],
}

impl<'a> Adjacency<'a> {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Length)> + 'a {
        self.targets.iter().copied().zip(self.lengths.iter().copied())
    }
}

/// Immutable graph with positive integer edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    directed: bool,
    weighted: bool,
    out: Csr,
    rev: Option<Csr>,
}

impl Graph {
    /// Normalizes an edge multiset into a graph: self-loops are dropped and
    /// parallel edges collapse to their minimum length.
    pub fn from_edges<I>(n: usize, directed: bool, weighted: bool, edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Length)>,
    {
        if n > u32::MAX as usize {
            return Err(GraphError::Validation(format!("{n} vertices exceed the 32-bit id space")));
        }
        let mut arcs = Vec::new();
        for (u, v, w) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::Validation(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if w == 0 {
                return Err(GraphError::Validation(format!("edge ({u}, {v}) has zero length")));
            }
            if !weighted && w != 1 {
                return Err(GraphError::Validation(format!("edge ({u}, {v}) has length {w} in an unweighted graph")));
            }
            if u == v {
                continue;
            }
            arcs.push((u, v, w));
            if !directed {
                arcs.push((v, u, w));
            }
        }
        arcs.sort_unstable();
        arcs.dedup_by(|later, first| later.0 == first.0 && later.1 == first.1);

        let max_len = arcs.iter().map(|a| a.2 as u64).max().unwrap_or(1);
        if (n.max(1) as u64 - 1) * max_len >= u32::MAX as u64 {
            return Err(GraphError::Validation(format!(
                "edge length {max_len} is too large for 32-bit path lengths on {n} vertices"
            )));
        }

        let out = Csr::from_sorted_arcs(n, &arcs);
        let (m, rev) = if directed {
            let mut reversed: Vec<_> = arcs.iter().map(|&(u, v, w)| (v, u, w)).collect();
            reversed.sort_unstable();
            (arcs.len(), Some(Csr::from_sorted_arcs(n, &reversed)))
        } else {
            (arcs.len() / 2, None)
        };
        Ok(Graph { n, m, directed, weighted, out, rev })
    }

    /// Unweighted undirected graph from an edge list; convenient for fixtures.
    pub fn undirected(n: usize, edges: &[(VertexId, VertexId)]) -> Graph {
        Graph::from_edges(n, false, false, edges.iter().map(|&(u, v)| (u, v, 1)))
            .expect("fixture edges must be in range")
    }

    /// Unweighted directed graph from an arc list.
    pub fn directed(n: usize, arcs: &[(VertexId, VertexId)]) -> Graph {
        Graph::from_edges(n, true, false, arcs.iter().map(|&(u, v)| (u, v, 1))).expect("fixture arcs must be in range")
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Edge count; each undirected edge counts once.
    pub fn num_edges(&self) -> usize {
        self.m
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    #[inline]
    pub fn out_edges(&self, v: VertexId) -> Adjacency<'_> {
        let r = self.out.range(v);
        Adjacency { targets: &self.out.targets[r.clone()], lengths: &self.out.lengths[r] }
    }

    #[inline]
    pub fn in_edges(&self, v: VertexId) -> Adjacency<'_> {
        let csr = self.rev.as_ref().unwrap_or(&self.out);
        let r = csr.range(v);
        Adjacency { targets: &csr.targets[r.clone()], lengths: &csr.lengths[r] }
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out.range(v).len()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_edges(v).len()
    }

    /// Total degree: in + out for directed graphs, neighbor count otherwise.
    pub fn degree(&self, v: VertexId) -> usize {
        if self.directed {
            self.out_degree(v) + self.in_degree(v)
        } else {
            self.out_degree(v)
        }
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n as VertexId).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn max_edge_length(&self) -> Length {
        self.out.lengths.iter().copied().max().unwrap_or(0)
    }

    /// Every edge once: arcs for directed graphs, `u < v` pairs otherwise.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Length)> + '_ {
        (0..self.n as VertexId).flat_map(move |u| {
            self.out_edges(u).iter().filter(move |&(v, _)| self.directed || u < v).map(move |(v, w)| (u, v, w))
        })
    }

    pub(crate) fn csr_parts(&self) -> (&[usize], &[VertexId], &[Length]) {
        (&self.out.offsets, &self.out.targets, &self.out.lengths)
    }
}

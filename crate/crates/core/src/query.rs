//! Distance queries by merge-joining two pivot-sorted labels.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::graph::{Length, VertexId};
use crate::labeling::{IndexEntry, LabelIndex};
use crate::INF;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryResult {
    /// [`INF`] when `t` is unreachable from `s`.
    pub distance: Length,
    /// Smallest pivot achieving `distance`; `None` exactly when unreachable.
    pub pivot: Option<VertexId>,
    pub label_entries_scanned: u64,
}

impl QueryResult {
    pub const UNREACHABLE: QueryResult = QueryResult { distance: INF, pivot: None, label_entries_scanned: 0 };

    pub fn is_reachable(&self) -> bool {
        self.distance != INF
    }

    /// The distance as text, `inf` when unreachable.
    pub fn display_distance(&self) -> DisplayDistance {
        DisplayDistance(self.distance)
    }
}

/// Formats a distance, writing [`INF`] as `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DisplayDistance(pub Length);

impl fmt::Display for DisplayDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == INF {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("vertex {vertex} out of range (n = {n})")]
    OutOfRange { vertex: VertexId, n: usize },
    #[error("reading labels: {0}")]
    Io(#[from] std::io::Error),
}

/// Anything that answers exact distance queries.
pub trait DistanceIndex: Sync {
    fn num_vertices(&self) -> usize;

    fn query(&self, s: VertexId, t: VertexId) -> Result<QueryResult, QueryError>;

    fn check(&self, v: VertexId) -> Result<(), QueryError> {
        if (v as usize) < self.num_vertices() {
            Ok(())
        } else {
            Err(QueryError::OutOfRange { vertex: v, n: self.num_vertices() })
        }
    }
}

/// Minimum `d1 + d2` over pivots common to `out` and `inn`, both sorted by
/// pivot. Ties keep the smaller pivot.
#[inline]
pub fn merge_join(out: &[IndexEntry], inn: &[IndexEntry]) -> QueryResult {
    let (mut i, mut j) = (0, 0);
    let mut best = INF as u64;
    let mut pivot = None;
    while i < out.len() && j < inn.len() {
        let (a, b) = (out[i], inn[j]);
        if a.pivot < b.pivot {
            i += 1;
        } else if a.pivot > b.pivot {
            j += 1;
        } else {
            let d = a.dist as u64 + b.dist as u64;
            if d < best {
                best = d;
                pivot = Some(a.pivot);
            }
            i += 1;
            j += 1;
        }
    }
    QueryResult { distance: best.min(INF as u64) as Length, pivot, label_entries_scanned: (i + j) as u64 }
}

impl DistanceIndex for LabelIndex {
    fn num_vertices(&self) -> usize {
        LabelIndex::num_vertices(self)
    }

    fn query(&self, s: VertexId, t: VertexId) -> Result<QueryResult, QueryError> {
        self.check(s)?;
        self.check(t)?;
        Ok(merge_join(self.out_label(s), self.in_label(t)))
    }
}

pub fn query<I: DistanceIndex + ?Sized>(idx: &I, s: VertexId, t: VertexId) -> Result<QueryResult, QueryError> {
    idx.query(s, t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BatchStats {
    pub queries: u64,
    pub errors: u64,
    pub elapsed: Duration,
}

impl BatchStats {
    pub fn mean_latency_us(&self) -> f64 {
        if self.queries == 0 {
            0.0
        } else {
            self.elapsed.as_secs_f64() * 1e6 / self.queries as f64
        }
    }

    pub fn throughput_qps(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if self.queries == 0 || secs == 0.0 {
            0.0
        } else {
            self.queries as f64 / secs
        }
    }
}

/// Answers a stream of pairs one at a time, handing each result to `sink`.
/// Errors are reported per pair and do not stop the stream.
pub fn batch_query<I, P, F>(idx: &I, pairs: P, mut sink: F) -> BatchStats
where
    I: DistanceIndex + ?Sized,
    P: IntoIterator<Item = (VertexId, VertexId)>,
    F: FnMut(VertexId, VertexId, Result<QueryResult, QueryError>),
{
    let mut stats = BatchStats::default();
    let start = Instant::now();
    for (s, t) in pairs {
        let res = idx.query(s, t);
        stats.queries += 1;
        stats.errors += u64::from(res.is_err());
        sink(s, t, res);
    }
    stats.elapsed = start.elapsed();
    stats
}

/// Answers a chunk of pairs, in parallel when asked; results keep input order.
pub fn query_chunk<I>(idx: &I, pairs: &[(VertexId, VertexId)], parallel: bool) -> Vec<Result<QueryResult, QueryError>>
where
    I: DistanceIndex + ?Sized,
{
    crate::par::map_indices(pairs.len(), parallel, || (), |_, i| idx.query(pairs[i].0, pairs[i].1))
}

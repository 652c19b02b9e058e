//! Ground truth for tests: plain shortest paths, hop diameter, brute-force
//! trough-path enumeration and canonical labels. Nothing here uses labels.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::graph::{Graph, Length, RankAssignment, VertexId};
use crate::labeling::{IndexEntry, LabelIndex, LabelTable};
use crate::par;

pub use crate::INF;

/// Distances from `s`, following edge direction. BFS on unweighted graphs,
/// Dijkstra otherwise.
pub fn sssp(g: &Graph, s: VertexId) -> Vec<Length> {
    if !g.is_weighted() {
        let mut dist = vec![INF; g.num_vertices()];
        let mut queue = VecDeque::from([s]);
        dist[s as usize] = 0;
        while let Some(u) = queue.pop_front() {
            for (v, _) in g.out_edges(u).iter() {
                if dist[v as usize] == INF {
                    dist[v as usize] = dist[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        return dist;
    }
    sssp_hops(g, s).into_iter().map(|(d, _)| d).collect()
}

/// Lexicographic (length, hops) shortest paths from `s`: for each target the
/// shortest length and the fewest edges among paths of that length.
pub fn sssp_hops(g: &Graph, s: VertexId) -> Vec<(Length, u32)> {
    let mut best = vec![(INF, u32::MAX); g.num_vertices()];
    let mut heap = BinaryHeap::new();
    best[s as usize] = (0, 0);
    heap.push(Reverse((0, 0, s)));
    while let Some(Reverse((d, h, u))) = heap.pop() {
        if (d, h) > best[u as usize] {
            continue;
        }
        for (v, w) in g.out_edges(u).iter() {
            let cand = (d + w, h + 1);
            if cand < best[v as usize] {
                best[v as usize] = cand;
                heap.push(Reverse((cand.0, cand.1, v)));
            }
        }
    }
    best
}

/// Row-major n x n distances with [`INF`] for unreachable pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Length>,
}

impl DistanceMatrix {
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, s: VertexId, t: VertexId) -> Length {
        self.d[s as usize * self.n + t as usize]
    }

    pub fn row(&self, s: VertexId) -> &[Length] {
        &self.d[s as usize * self.n..(s as usize + 1) * self.n]
    }
}

pub fn all_pairs(g: &Graph) -> DistanceMatrix {
    let n = g.num_vertices();
    let rows = par::map_indices(n, true, || (), |_, s| sssp(g, s as VertexId));
    DistanceMatrix { n, d: rows.concat() }
}

/// Largest hop count over all reachable pairs, taking for each pair the
/// fewest-edge representative among its shortest paths.
pub fn hop_diameter(g: &Graph) -> u32 {
    let per_source = par::map_indices(
        g.num_vertices(),
        true,
        || (),
        |_, s| sssp_hops(g, s as VertexId).into_iter().filter(|&(d, _)| d != INF).map(|(_, h)| h).max().unwrap_or(0),
    );
    per_source.into_iter().max().unwrap_or(0)
}

/// Minimum trough-path lengths by hop budget, from exhaustive enumeration of
/// simple paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TroughTable {
    max_hops: usize,
    /// `(u, v)` -> entry `h - 1` holds the shortest trough path from u to v
    /// with at most `h` edges, or [`INF`].
    by_pair: HashMap<(VertexId, VertexId), Vec<Length>>,
}

impl TroughTable {
    pub fn max_hops(&self) -> usize {
        self.max_hops
    }

    /// Shortest trough path from `u` to `v` using at most `hops` edges.
    pub fn min_within(&self, u: VertexId, v: VertexId, hops: usize) -> Length {
        if hops == 0 {
            return if u == v { 0 } else { INF };
        }
        let h = hops.min(self.max_hops);
        self.by_pair.get(&(u, v)).map_or(INF, |row| row[h - 1])
    }

    /// Pairs with at least one trough path within the hop cap.
    pub fn pairs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.by_pair.keys().copied()
    }
}

/// Enumerates every simple path of at most `max_hops` edges whose interior
/// vertices all rank below the higher-ranked endpoint.
///
/// Panics above 12 vertices; the enumeration is exponential.
pub fn trough_paths(g: &Graph, r: &RankAssignment, max_hops: usize) -> TroughTable {
    let n = g.num_vertices();
    assert!(n <= 12, "trough path enumeration is limited to 12 vertices, got {n}");
    let mut walk = TroughWalk { g, r, max_hops, source: 0, on_path: vec![false; n], by_pair: HashMap::new() };
    for s in 0..n as VertexId {
        walk.source = s;
        walk.on_path[s as usize] = true;
        walk.extend(s, 0, 0, -1);
        walk.on_path[s as usize] = false;
    }
    let by_pair = walk.by_pair;
    TroughTable { max_hops, by_pair }
}

struct TroughWalk<'a> {
    g: &'a Graph,
    r: &'a RankAssignment,
    max_hops: usize,
    source: VertexId,
    on_path: Vec<bool>,
    by_pair: HashMap<(VertexId, VertexId), Vec<Length>>,
}

impl TroughWalk<'_> {
    /// `interior` is the highest score strictly inside the path so far.
    fn extend(&mut self, v: VertexId, len: Length, hops: usize, interior: i64) {
        let s = self.source;
        if hops > 0 && interior < self.r.score(s).max(self.r.score(v)) as i64 {
            let row = self.by_pair.entry((s, v)).or_insert_with(|| vec![INF; self.max_hops]);
            for slot in &mut row[hops - 1..] {
                *slot = (*slot).min(len);
            }
        }
        if hops == self.max_hops {
            return;
        }
        let interior = if hops > 0 { interior.max(self.r.score(v) as i64) } else { interior };
        for (next, w) in self.g.out_edges(v).iter() {
            if !self.on_path[next as usize] {
                self.on_path[next as usize] = true;
                self.extend(next, len + w, hops + 1, interior);
                self.on_path[next as usize] = false;
            }
        }
    }
}

/// The canonical labeling: `w` is a pivot for the pair (u, v) exactly when it
/// is the highest-ranked vertex on some shortest u-v path.
pub fn canonical_labels(g: &Graph, r: &RankAssignment) -> LabelIndex {
    let n = g.num_vertices();
    let d = all_pairs(g);
    let mut out: Vec<Vec<IndexEntry>> = vec![Vec::new(); n];
    let mut inn: Vec<Vec<IndexEntry>> = vec![Vec::new(); n];
    for u in 0..n as VertexId {
        for v in 0..n as VertexId {
            let duv = d.get(u, v);
            if duv == INF {
                continue;
            }
            let w = (0..n as VertexId)
                .filter(|&w| {
                    let (a, b) = (d.get(u, w), d.get(w, v));
                    a != INF && b != INF && a as u64 + b as u64 == duv as u64
                })
                .max_by_key(|&w| r.score(w))
                .expect("endpoints lie on every shortest path");
            out[u as usize].push(IndexEntry { pivot: w, dist: d.get(u, w) });
            let target = if g.is_directed() { &mut inn } else { &mut out };
            target[v as usize].push(IndexEntry { pivot: w, dist: d.get(w, v) });
        }
    }
    let dedup = |mut lists: Vec<Vec<IndexEntry>>| {
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        LabelTable::from_lists(lists)
    };
    let inn = g.is_directed().then(|| dedup(inn));
    LabelIndex::new(g.is_directed(), g.is_weighted(), dedup(out), inn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_named, rank_by_degree, NamedShape, RankStrategy};

    #[test]
    fn path_distances() {
        let g = generate_named(NamedShape::Path, 3);
        assert_eq!(sssp(&g, 0), vec![0, 1, 2]);
    }

    #[test]
    fn isolated_vertex_unreachable() {
        let g = Graph::undirected(3, &[(0, 1)]);
        assert_eq!(sssp(&g, 0)[2], INF);
    }

    #[test]
    fn weighted_triangle_prefers_two_hops() {
        let g = Graph::from_edges(3, false, true, [(0, 1, 1), (1, 2, 1), (0, 2, 3)]).unwrap();
        assert_eq!(sssp(&g, 0)[2], 2);
    }

    #[test]
    fn hop_diameters() {
        assert_eq!(hop_diameter(&generate_named(NamedShape::Cycle, 6)), 3);
        assert_eq!(hop_diameter(&generate_named(NamedShape::Star, 6)), 2);
        // the 3-edge path 0-1-2-3 (length 3) beats the direct edge (length 5)
        let g = Graph::from_edges(4, false, true, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 5)]).unwrap();
        assert!(hop_diameter(&g) >= 3);
    }

    #[test]
    fn all_pairs_matches_rows() {
        let g = Graph::directed(4, &[(0, 1), (1, 2), (2, 0), (3, 2)]);
        let m = all_pairs(&g);
        for s in 0..4 {
            assert_eq!(m.row(s), sssp(&g, s).as_slice());
            assert_eq!(m.get(s, s), 0);
        }
    }

    #[test]
    fn trough_excludes_high_interior() {
        // path 0-1-2 where 1 outranks both endpoints
        let g = generate_named(NamedShape::Path, 3);
        let r = RankAssignment::from_scores(vec![0, 2, 1]).unwrap();
        let t = trough_paths(&g, &r, 3);
        assert_eq!(t.min_within(0, 2, 3), INF);
        assert_eq!(t.min_within(0, 1, 1), 1);
    }

    #[test]
    fn c4_hand_enumeration() {
        // C4 0-1-2-3-0, score = id. All 8 directed edges qualify; of the
        // opposite pairs only 0-1-2, 1-0-3 and their reverses do (the other
        // routes pass through 3 or 2 with a higher-ranked interior).
        let g = generate_named(NamedShape::Cycle, 4);
        let r = RankAssignment::from_scores(vec![0, 1, 2, 3]).unwrap();
        let t = trough_paths(&g, &r, 3);
        let mut pairs: Vec<_> = t.pairs().collect();
        pairs.sort();
        assert_eq!(pairs.len(), 12);
        assert_eq!(t.min_within(0, 2, 2), 2);
        assert_eq!(t.min_within(1, 3, 2), 2);
        assert_eq!(t.min_within(0, 3, 1), 1);
        assert_eq!(t.min_within(1, 2, 3), 1);
    }

    #[test]
    fn canonical_star() {
        let g = generate_named(NamedShape::Star, 6);
        let r = rank_by_degree(&g, RankStrategy::Degree);
        let idx = canonical_labels(&g, &r);
        assert_eq!(idx.non_trivial_entries(), 5);
        for leaf in 1..6 {
            assert_eq!(idx.out_label(leaf), &[IndexEntry { pivot: 0, dist: 1 }, IndexEntry { pivot: leaf, dist: 0 }]);
        }
    }

    #[test]
    fn canonical_isolated() {
        let g = Graph::undirected(2, &[]);
        let r = rank_by_degree(&g, RankStrategy::Degree);
        assert_eq!(canonical_labels(&g, &r).non_trivial_entries(), 0);
    }
}

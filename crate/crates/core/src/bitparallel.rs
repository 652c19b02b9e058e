//! Bit-parallel labels for undirected unweighted graphs.
//!
//! A few high-ranked roots `r` are taken together with up to 64 neighbors
//! `S_r`. For every vertex `v` one tuple per root records `d(r, v)` and two
//! masks over `S_r`: members one step closer to `v` than `r` is (`s_minus`)
//! and members at the same distance (`s_zero`). Two tuples for the same root
//! give `min_{u in {r} + S_r} d(s, u) + d(u, t)` in constant time, so every
//! label entry whose pivot lies in some `{r} + S_r` can be dropped from the
//! normal labels.
//!
//! Distances and masks come from one bit-parallel BFS per root rather than
//! from the label entries themselves: a vertex's labels need not hold an
//! entry for every member of `S_r`, and masks derived from missing entries
//! would not be exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, Length, RankAssignment, VertexId};
use crate::labeling::{IndexEntry, LabelIndex, LabelTable};
use crate::query::{merge_join, DistanceIndex, QueryError, QueryResult};
use crate::{par, INF};

/// Width of the per-vertex root marker.
pub const MAX_ROOTS: usize = 50;
/// Width of the neighbor masks.
pub const MAX_NEIGHBORS: usize = 64;
/// Random pairs checked against the source index before a transform returns.
pub const VERIFY_SAMPLE: usize = 1000;

#[derive(Debug, Error)]
pub enum BpError {
    #[error("bit-parallel labels need an undirected unweighted graph")]
    Unsupported,
    #[error("at most {MAX_ROOTS} roots are supported, {0} requested")]
    TooManyRoots(usize),
    #[error("index has {index} vertices but graph has {graph}")]
    SizeMismatch { index: usize, graph: usize },
    #[error("bit-parallel query({s}, {t}) = {got}, plain query = {expected}")]
    Verification { s: VertexId, t: VertexId, got: Length, expected: Length },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BpTuple {
    /// Index into [`BpIndex::roots`].
    pub root: u8,
    pub dist: Length,
    pub s_minus: u64,
    pub s_zero: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpRoot {
    pub vertex: VertexId,
    /// `S_r`, highest-ranked first; bit `i` of a mask refers to entry `i`.
    pub neighbors: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpIndex {
    roots: Vec<BpRoot>,
    marker: Vec<u64>,
    root_offsets: Vec<[u8; MAX_ROOTS]>,
    tuple_offsets: Vec<u64>,
    tuples: Vec<BpTuple>,
    normal: LabelTable,
}

/// A query answer with the number of root tuples compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BpQueryResult {
    pub result: QueryResult,
    pub tuples_touched: u64,
}

impl BpIndex {
    /// Assembles an index from parts, validating the per-vertex layout.
    pub fn from_parts(
        roots: Vec<BpRoot>,
        marker: Vec<u64>,
        tuple_offsets: Vec<u64>,
        tuples: Vec<BpTuple>,
        normal: LabelTable,
    ) -> Option<BpIndex> {
        let n = normal.num_vertices();
        if roots.len() > MAX_ROOTS
            || roots.iter().any(|r| r.neighbors.len() > MAX_NEIGHBORS)
            || marker.len() != n
            || tuple_offsets.len() != n + 1
            || tuple_offsets.first() != Some(&0)
            || tuple_offsets.last() != Some(&(tuples.len() as u64))
            || tuple_offsets.windows(2).any(|w| w[0] > w[1])
        {
            return None;
        }
        let mut root_offsets = vec![[u8::MAX; MAX_ROOTS]; n];
        for v in 0..n {
            let list = &tuples[tuple_offsets[v] as usize..tuple_offsets[v + 1] as usize];
            let mut seen = 0u64;
            for (k, t) in list.iter().enumerate() {
                let i = t.root as usize;
                if i >= roots.len() || (k > 0 && list[k - 1].root >= t.root) || t.s_minus & t.s_zero != 0 {
                    return None;
                }
                seen |= 1 << i;
                root_offsets[v][i] = k as u8;
            }
            if seen != marker[v] {
                return None;
            }
        }
        Some(BpIndex { roots, marker, root_offsets, tuple_offsets, tuples, normal })
    }

    pub fn num_vertices(&self) -> usize {
        self.marker.len()
    }

    pub fn roots(&self) -> &[BpRoot] {
        &self.roots
    }

    pub fn marker(&self, v: VertexId) -> u64 {
        self.marker[v as usize]
    }

    pub fn markers(&self) -> &[u64] {
        &self.marker
    }

    pub fn tuple_offsets(&self) -> &[u64] {
        &self.tuple_offsets
    }

    pub fn tuples(&self) -> &[BpTuple] {
        &self.tuples
    }

    pub fn vertex_tuples(&self, v: VertexId) -> &[BpTuple] {
        &self.tuples[self.tuple_offsets[v as usize] as usize..self.tuple_offsets[v as usize + 1] as usize]
    }

    /// The tuple of `v` for root `i`, located through the offset table.
    pub fn tuple(&self, v: VertexId, i: usize) -> Option<&BpTuple> {
        (self.marker[v as usize] >> i & 1 == 1)
            .then(|| &self.vertex_tuples(v)[self.root_offsets[v as usize][i] as usize])
    }

    pub fn normal(&self) -> &LabelTable {
        &self.normal
    }

    pub fn query_detailed(&self, s: VertexId, t: VertexId) -> Result<BpQueryResult, QueryError> {
        self.check(s)?;
        self.check(t)?;
        if s == t {
            let result = QueryResult { distance: 0, pivot: Some(s), label_entries_scanned: 0 };
            return Ok(BpQueryResult { result, tuples_touched: 0 });
        }
        let mut best = merge_join(self.normal.label(s), self.normal.label(t));
        let mut common = self.marker[s as usize] & self.marker[t as usize];
        let mut touched = 0u64;
        while common != 0 {
            let i = common.trailing_zeros() as usize;
            common &= common - 1;
            touched += 1;
            let (a, b) = (self.tuple(s, i).expect("marked"), self.tuple(t, i).expect("marked"));
            let root = &self.roots[i];
            let both_minus = a.s_minus & b.s_minus;
            let one_minus = (a.s_minus & b.s_zero) | (a.s_zero & b.s_minus);
            let (cut, via) = if both_minus != 0 {
                (2, root.neighbors[both_minus.trailing_zeros() as usize])
            } else if one_minus != 0 {
                (1, root.neighbors[one_minus.trailing_zeros() as usize])
            } else {
                (0, root.vertex)
            };
            let d = (a.dist as u64 + b.dist as u64 - cut) as Length;
            if d < best.distance || (d == best.distance && best.pivot.is_some_and(|p| via < p)) {
                best.distance = d;
                best.pivot = Some(via);
            }
        }
        Ok(BpQueryResult { result: best, tuples_touched: touched })
    }

    pub fn total_tuples(&self) -> usize {
        self.tuples.len()
    }
}

impl DistanceIndex for BpIndex {
    fn num_vertices(&self) -> usize {
        BpIndex::num_vertices(self)
    }

    fn query(&self, s: VertexId, t: VertexId) -> Result<QueryResult, QueryError> {
        self.query_detailed(s, t).map(|r| r.result)
    }
}

pub fn bp_query(idx: &BpIndex, s: VertexId, t: VertexId) -> Result<QueryResult, QueryError> {
    idx.query(s, t)
}

/// Greedy root choice: the highest-ranked vertex not yet used becomes a root
/// and claims up to 64 of its highest-ranked unused neighbors.
pub fn select_roots(g: &Graph, r: &RankAssignment, num_roots: usize) -> Vec<BpRoot> {
    let mut used = vec![false; g.num_vertices()];
    let mut roots = Vec::new();
    for &v in r.by_importance() {
        if roots.len() == num_roots {
            break;
        }
        if used[v as usize] {
            continue;
        }
        used[v as usize] = true;
        let mut nb: Vec<VertexId> = g.out_edges(v).iter().map(|(u, _)| u).filter(|&u| !used[u as usize]).collect();
        nb.sort_unstable_by_key(|&u| std::cmp::Reverse(r.score(u)));
        nb.truncate(MAX_NEIGHBORS);
        for &u in &nb {
            used[u as usize] = true;
        }
        roots.push(BpRoot { vertex: v, neighbors: nb });
    }
    roots
}

/// Distances and masks from one root by level-synchronous BFS.
fn bp_bfs(g: &Graph, root: &BpRoot) -> (Vec<Length>, Vec<(u64, u64)>) {
    let n = g.num_vertices();
    let mut dist = vec![INF; n];
    let mut masks = vec![(0u64, 0u64); n];
    dist[root.vertex as usize] = 0;
    for (i, &u) in root.neighbors.iter().enumerate() {
        dist[u as usize] = 1;
        masks[u as usize].0 |= 1 << i;
    }
    let mut level: Vec<VertexId> = vec![root.vertex];
    let mut siblings = Vec::new();
    let mut children = Vec::new();
    let mut depth = 0;
    while !level.is_empty() {
        siblings.clear();
        children.clear();
        for &v in &level {
            for (w, _) in g.out_edges(v).iter() {
                let dw = dist[w as usize];
                if dw == depth && v < w {
                    siblings.push((v, w));
                } else if dw == INF || dw == depth + 1 {
                    if dw == INF {
                        dist[w as usize] = depth + 1;
                    }
                    children.push((v, w));
                }
            }
        }
        for &(v, w) in &siblings {
            masks[v as usize].1 |= masks[w as usize].0;
            masks[w as usize].1 |= masks[v as usize].0;
        }
        for &(v, c) in &children {
            let (m1, m0) = masks[v as usize];
            masks[c as usize].0 |= m1;
            masks[c as usize].1 |= m0;
        }
        let mut next: Vec<VertexId> =
            children.iter().map(|&(_, c)| c).filter(|&c| dist[c as usize] == depth + 1).collect();
        next.sort_unstable();
        next.dedup();
        level = next;
        depth += 1;
    }
    for m in &mut masks {
        m.1 &= !m.0;
    }
    (dist, masks)
}

/// Moves label entries whose pivot is a root or a root neighbor into
/// bit-parallel tuples, then checks a random sample of pairs against `idx`.
pub fn bp_transform(idx: &LabelIndex, g: &Graph, r: &RankAssignment, num_roots: usize) -> Result<BpIndex, BpError> {
    if g.is_directed() || g.is_weighted() || idx.is_directed() {
        return Err(BpError::Unsupported);
    }
    if num_roots > MAX_ROOTS {
        return Err(BpError::TooManyRoots(num_roots));
    }
    let n = g.num_vertices();
    if idx.num_vertices() != n {
        return Err(BpError::SizeMismatch { index: idx.num_vertices(), graph: n });
    }
    let roots = select_roots(g, r, num_roots);
    let mut group = vec![u8::MAX; n];
    for (i, root) in roots.iter().enumerate() {
        group[root.vertex as usize] = i as u8;
        for &u in &root.neighbors {
            group[u as usize] = i as u8;
        }
    }
    let mut marker = vec![0u64; n];
    let mut normal_lists: Vec<Vec<IndexEntry>> = Vec::with_capacity(n);
    for v in 0..n as VertexId {
        let mut keep = Vec::new();
        for &e in idx.out_label(v) {
            match group[e.pivot as usize] {
                u8::MAX => keep.push(e),
                i => marker[v as usize] |= 1 << i,
            }
        }
        normal_lists.push(keep);
    }

    let per_root = par::map_indices(
        roots.len(),
        true,
        || (),
        |_, i| {
            let (dist, masks) = bp_bfs(g, &roots[i]);
            (0..n)
                .filter(|&v| marker[v] >> i & 1 == 1)
                .map(|v| {
                    let (s_minus, s_zero) = masks[v];
                    (v as VertexId, BpTuple { root: i as u8, dist: dist[v], s_minus, s_zero })
                })
                .collect::<Vec<_>>()
        },
    );
    let mut tuple_offsets = vec![0u64; n + 1];
    for v in 0..n {
        tuple_offsets[v + 1] = tuple_offsets[v] + marker[v].count_ones() as u64;
    }
    let mut cursor = tuple_offsets.clone();
    let placeholder = BpTuple { root: 0, dist: 0, s_minus: 0, s_zero: 0 };
    let mut tuples = vec![placeholder; tuple_offsets[n] as usize];
    for list in per_root {
        for (v, t) in list {
            tuples[cursor[v as usize] as usize] = t;
            cursor[v as usize] += 1;
        }
    }
    let bp = BpIndex::from_parts(roots, marker, tuple_offsets, tuples, LabelTable::from_lists(normal_lists))
        .expect("transform produces a consistent layout");
    verify_sample(&bp, idx, VERIFY_SAMPLE)?;
    Ok(bp)
}

fn verify_sample(bp: &BpIndex, idx: &LabelIndex, samples: usize) -> Result<(), BpError> {
    let n = idx.num_vertices();
    if n == 0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xb17);
    for _ in 0..samples {
        let (s, t) = (rng.gen_range(0..n) as VertexId, rng.gen_range(0..n) as VertexId);
        let expected = idx.query(s, t).expect("in range").distance;
        let got = bp.query(s, t).expect("in range").distance;
        if got != expected {
            return Err(BpError::Verification { s, t, got, expected });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_named, rank_by_degree, NamedShape, RankStrategy};
    use crate::labeling::{build_index, BuildConfig};

    fn setup(g: &Graph) -> (RankAssignment, LabelIndex) {
        let r = rank_by_degree(g, RankStrategy::Degree);
        let idx = build_index(g, &r, &BuildConfig::default()).unwrap().index;
        (r, idx)
    }

    #[test]
    fn zero_roots_is_identity() {
        let g = generate_named(NamedShape::Cycle, 7);
        let (r, idx) = setup(&g);
        let bp = bp_transform(&idx, &g, &r, 0).unwrap();
        assert_eq!(bp.total_tuples(), 0);
        assert_eq!(bp.normal(), idx.out_table());
    }

    #[test]
    fn star_leaves_get_center_tuples() {
        let g = generate_named(NamedShape::Star, 6);
        let (r, idx) = setup(&g);
        let bp = bp_transform(&idx, &g, &r, 1).unwrap();
        assert_eq!(bp.roots()[0].vertex, 0);
        assert_eq!(bp.roots()[0].neighbors.len(), 5);
        // every pivot is absorbed, so the normal labels are empty
        assert_eq!(bp.normal().len(), 0);
        for leaf in 1..6 {
            let t = bp.tuple(leaf, 0).unwrap();
            assert_eq!(t.dist, 1);
            let me = 1u64 << bp.roots()[0].neighbors.iter().position(|&u| u == leaf).unwrap();
            assert_eq!(t.s_minus, me);
            assert_eq!(t.s_zero, 0);
        }
        for s in 0..6 {
            for t in 0..6 {
                assert_eq!(bp.query(s, t).unwrap().distance, idx.query(s, t).unwrap().distance);
            }
        }
    }

    #[test]
    fn adjacent_root_neighbors_are_one_apart() {
        // triangle 0-1-2 plus tail 2-3: root 2, S = {0, 1, 3}
        let g = Graph::undirected(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let (r, idx) = setup(&g);
        let bp = bp_transform(&idx, &g, &r, 1).unwrap();
        assert_eq!(bp.roots()[0].vertex, 2);
        let res = bp.query_detailed(0, 1).unwrap();
        assert_eq!(res.result.distance, 1);
        assert!(res.tuples_touched <= (bp.marker(0) & bp.marker(1)).count_ones() as u64);
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let g = Graph::directed(2, &[(0, 1)]);
        let r = rank_by_degree(&g, RankStrategy::Degree);
        let idx = build_index(&g, &r, &BuildConfig::default()).unwrap().index;
        assert!(matches!(bp_transform(&idx, &g, &r, 1), Err(BpError::Unsupported)));
        let u = generate_named(NamedShape::Path, 3);
        let (r, idx) = setup(&u);
        assert!(matches!(bp_transform(&idx, &u, &r, 51), Err(BpError::TooManyRoots(51))));
    }

    #[test]
    fn disconnected_pairs_stay_unreachable() {
        let g = Graph::undirected(5, &[(0, 1), (1, 2), (3, 4)]);
        let (r, idx) = setup(&g);
        let bp = bp_transform(&idx, &g, &r, 2).unwrap();
        assert_eq!(bp.query(0, 4).unwrap().distance, INF);
        assert_eq!(bp.query(3, 3).unwrap().distance, 0);
    }
}

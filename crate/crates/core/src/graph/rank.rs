use std::io::{BufRead, Write};

use super::{Graph, GraphError, VertexId};

/// Total importance order over vertices.
///
/// `score(v)` is a permutation of `[0, n)`; a larger score means a more
/// important vertex, so "u outranks v" is literally `score(u) > score(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankAssignment {
    score: Vec<u32>,
    /// Vertices from most to least important.
    order: Vec<VertexId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RankStrategy {
    /// Total degree (in + out for directed graphs).
    #[default]
    Degree,
    /// Product of in-degree and out-degree. On undirected graphs this orders
    /// vertices exactly like `Degree`.
    InOutProduct,
}

impl RankAssignment {
    /// Builds from vertices listed most important first.
    pub fn from_order(order: Vec<VertexId>) -> Result<RankAssignment, GraphError> {
        let n = order.len();
        let mut score = vec![u32::MAX; n];
        for (pos, &v) in order.iter().enumerate() {
            let slot = score
                .get_mut(v as usize)
                .ok_or_else(|| GraphError::Validation(format!("ranking mentions vertex {v} but n = {n}")))?;
            if *slot != u32::MAX {
                return Err(GraphError::Validation(format!("vertex {v} ranked twice")));
            }
            *slot = (n - 1 - pos) as u32;
        }
        Ok(RankAssignment { score, order })
    }

    /// Builds from an explicit score permutation.
    pub fn from_scores(score: Vec<u32>) -> Result<RankAssignment, GraphError> {
        let n = score.len();
        let mut order = vec![u32::MAX; n];
        for (v, &s) in score.iter().enumerate() {
            let slot = order
                .get_mut(n.wrapping_sub(1).wrapping_sub(s as usize))
                .filter(|_| (s as usize) < n)
                .ok_or_else(|| GraphError::Validation(format!("score {s} out of range")))?;
            if *slot != u32::MAX {
                return Err(GraphError::Validation(format!("score {s} assigned twice")));
            }
            *slot = v as VertexId;
        }
        Ok(RankAssignment { score, order })
    }

    pub fn len(&self) -> usize {
        self.score.len()
    }

    pub fn is_empty(&self) -> bool {
        self.score.is_empty()
    }

    #[inline]
    pub fn score(&self, v: VertexId) -> u32 {
        self.score[v as usize]
    }

    pub fn scores(&self) -> &[u32] {
        &self.score
    }

    /// Vertices from most to least important.
    pub fn by_importance(&self) -> &[VertexId] {
        &self.order
    }

    #[inline]
    pub fn outranks(&self, a: VertexId, b: VertexId) -> bool {
        self.score[a as usize] > self.score[b as usize]
    }
}

/// Ranks by non-increasing degree key; ties go to the smaller vertex id.
pub fn rank_by_degree(g: &Graph, strategy: RankStrategy) -> RankAssignment {
    let key = |v: VertexId| -> u64 {
        match strategy {
            RankStrategy::Degree => g.degree(v) as u64,
            RankStrategy::InOutProduct if g.is_directed() => g.in_degree(v) as u64 * g.out_degree(v) as u64,
            RankStrategy::InOutProduct => {
                let d = g.degree(v) as u64;
                d * d
            }
        }
    };
    let mut order: Vec<VertexId> = (0..g.num_vertices() as VertexId).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(key(v)), v));
    RankAssignment::from_order(order).expect("degree order is a permutation")
}

/// Reads one vertex id per line, most important first. Blank lines and `#`
/// comments are skipped; every vertex of `[0, n)` must appear exactly once.
pub fn load_ranking<R: BufRead>(reader: R, n: usize) -> Result<RankAssignment, GraphError> {
    let mut order = Vec::with_capacity(n);
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: VertexId =
            t.parse().map_err(|e| GraphError::Parse { line: idx + 1, message: format!("bad vertex id {t:?}: {e}") })?;
        if v as usize >= n {
            return Err(GraphError::Validation(format!("line {}: vertex {v} out of range for n = {n}", idx + 1)));
        }
        order.push(v);
    }
    if order.len() != n {
        return Err(GraphError::Validation(format!("ranking lists {} vertices, graph has {n}", order.len())));
    }
    RankAssignment::from_order(order)
}

pub fn write_ranking<W: Write>(r: &RankAssignment, mut w: W) -> std::io::Result<()> {
    for v in r.by_importance() {
        writeln!(w, "{v}")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_named, NamedShape};

    #[test]
    fn star_center_ranks_first() {
        let g = generate_named(NamedShape::Star, 6);
        let r = rank_by_degree(&g, RankStrategy::Degree);
        assert_eq!(r.score(0), 5);
        assert_eq!(r.by_importance()[0], 0);
    }

    #[test]
    fn equal_degrees_break_ties_by_smaller_id() {
        let g = generate_named(NamedShape::Cycle, 4);
        let r = rank_by_degree(&g, RankStrategy::Degree);
        assert_eq!(r.scores(), &[3, 2, 1, 0]);
    }

    #[test]
    fn in_out_product_key() {
        // vertex 0: in 3, out 2 -> 6; vertex 1: in 5, out 1 -> 5
        let mut arcs = vec![(2, 0), (3, 0), (4, 0), (0, 5), (0, 6), (1, 7)];
        arcs.extend([(2, 1), (3, 1), (4, 1), (5, 1), (6, 1)]);
        let g = Graph::directed(8, &arcs);
        let r = rank_by_degree(&g, RankStrategy::InOutProduct);
        assert!(r.outranks(0, 1));
        // plain degree would prefer vertex 1 (6 > 5)
        assert!(rank_by_degree(&g, RankStrategy::Degree).outranks(1, 0));
    }

    #[test]
    fn ranking_file() {
        let r = load_ranking("2\n0\n1\n".as_bytes(), 3).unwrap();
        assert_eq!(r.scores(), &[1, 0, 2]);
        assert!(load_ranking("2\n0\n".as_bytes(), 3).is_err());
        assert!(load_ranking("2\n0\n0\n".as_bytes(), 3).is_err());
        assert!(load_ranking("".as_bytes(), 0).unwrap().is_empty());
        let mut out = Vec::new();
        write_ranking(&r, &mut out).unwrap();
        assert_eq!(load_ranking(out.as_slice(), 3).unwrap(), r);
    }

    #[test]
    fn from_scores_validates() {
        let r = RankAssignment::from_scores(vec![0, 2, 1]).unwrap();
        assert_eq!(r.by_importance(), &[1, 2, 0]);
        assert!(RankAssignment::from_scores(vec![0, 0, 1]).is_err());
        assert!(RankAssignment::from_scores(vec![0, 3, 1]).is_err());
    }
}

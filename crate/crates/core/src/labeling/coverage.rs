use crate::graph::RankAssignment;

use super::LabelIndex;

/// Coverage targets reported by default.
pub const COVERAGE_TARGETS: [f64; 3] = [0.7, 0.8, 0.9];

/// How many non-trivial entries the top-k ranked vertices account for as
/// pivots, for every k.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    /// `cumulative[k]` = entries whose pivot is among the top `k` vertices.
    cumulative: Vec<u64>,
}

impl Coverage {
    pub fn compute(idx: &LabelIndex, r: &RankAssignment) -> Coverage {
        Coverage::from_pivot_counts(&idx.pivot_counts(), r)
    }

    /// From per-vertex non-trivial pivot counts, as produced by
    /// [`LabelIndex::pivot_counts`].
    pub fn from_pivot_counts(counts: &[u64], r: &RankAssignment) -> Coverage {
        let mut cumulative = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0u64;
        cumulative.push(0);
        for &v in r.by_importance() {
            acc += counts[v as usize];
            cumulative.push(acc);
        }
        Coverage { cumulative }
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().unwrap_or(&0)
    }

    fn n(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Share of entries covered by the top `fraction` of vertices (rounded up
    /// to whole vertices).
    pub fn covered_by_top(&self, fraction: f64) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        let k = ((fraction * self.n() as f64) - 1e-9).ceil().clamp(0.0, self.n() as f64) as usize;
        self.cumulative[k] as f64 / self.total() as f64
    }

    /// Smallest fraction of top vertices covering at least `target` of the
    /// entries.
    pub fn top_fraction_for(&self, target: f64) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        let need = target * self.total() as f64;
        let k = self.cumulative.partition_point(|&c| (c as f64) < need - 1e-9);
        k.min(self.n()) as f64 / self.n() as f64
    }
}

/// Coverage at the requested vertex fractions, plus the inverse view at
/// [`COVERAGE_TARGETS`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageTable {
    /// (fraction of top vertices, share of entries covered)
    pub by_fraction: Vec<(f64, f64)>,
    /// (target share, minimal fraction of top vertices)
    pub by_target: Vec<(f64, f64)>,
}

pub fn coverage_by_top(idx: &LabelIndex, r: &RankAssignment, fractions: &[f64]) -> CoverageTable {
    Coverage::compute(idx, r).table(fractions)
}

impl Coverage {
    pub fn table(&self, fractions: &[f64]) -> CoverageTable {
        let cov = self;
        CoverageTable {
            by_fraction: fractions.iter().map(|&f| (f, cov.covered_by_top(f))).collect(),
            by_target: COVERAGE_TARGETS.iter().map(|&c| (c, cov.top_fraction_for(c))).collect(),
        }
    }
}

use crate::graph::{Length, VertexId};

/// One entry of a finished label: a pivot and the distance to or from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexEntry {
    pub pivot: VertexId,
    pub dist: Length,
}

/// Per-vertex labels of one side in CSR form, each sorted by pivot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTable {
    offsets: Vec<u64>,
    entries: Vec<IndexEntry>,
}

impl LabelTable {
    pub fn from_lists<I, L>(lists: I) -> LabelTable
    where
        I: IntoIterator<Item = L>,
        L: IntoIterator<Item = IndexEntry>,
    {
        let mut offsets = vec![0u64];
        let mut entries = Vec::new();
        for list in lists {
            let start = entries.len();
            entries.extend(list);
            entries[start..].sort_unstable();
            offsets.push(entries.len() as u64);
        }
        LabelTable { offsets, entries }
    }

    /// Wraps raw arrays; offsets must start at 0, be monotone and end at
    /// `entries.len()`, and each slice must be strictly sorted by pivot.
    pub fn from_parts(offsets: Vec<u64>, entries: Vec<IndexEntry>) -> Option<LabelTable> {
        let ok = offsets.first() == Some(&0)
            && offsets.last() == Some(&(entries.len() as u64))
            && offsets.windows(2).all(|w| w[0] <= w[1])
            && offsets
                .windows(2)
                .all(|w| entries[w[0] as usize..w[1] as usize].windows(2).all(|p| p[0].pivot < p[1].pivot));
        ok.then_some(LabelTable { offsets, entries })
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn label(&self, v: VertexId) -> &[IndexEntry] {
        let v = v as usize;
        &self.entries[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }
}

/// Finished 2-hop index. Undirected graphs store one side; `in_label` then
/// returns the same slice as `out_label`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelIndex {
    directed: bool,
    weighted: bool,
    out: LabelTable,
    inn: Option<LabelTable>,
}

impl LabelIndex {
    /// Panics if the in side is present exactly when the graph is undirected,
    /// or if the two sides disagree on the vertex count.
    pub fn new(directed: bool, weighted: bool, out: LabelTable, inn: Option<LabelTable>) -> LabelIndex {
        assert_eq!(directed, inn.is_some(), "directed indexes carry an in side, undirected ones do not");
        if let Some(t) = &inn {
            assert_eq!(t.num_vertices(), out.num_vertices());
        }
        LabelIndex { directed, weighted, out, inn }
    }

    pub fn num_vertices(&self) -> usize {
        self.out.num_vertices()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    #[inline]
    pub fn out_label(&self, v: VertexId) -> &[IndexEntry] {
        self.out.label(v)
    }

    #[inline]
    pub fn in_label(&self, v: VertexId) -> &[IndexEntry] {
        self.inn.as_ref().unwrap_or(&self.out).label(v)
    }

    pub fn out_table(&self) -> &LabelTable {
        &self.out
    }

    pub fn in_table(&self) -> Option<&LabelTable> {
        self.inn.as_ref()
    }

    /// Entries over the stored sides, trivial ones included.
    pub fn total_entries(&self) -> usize {
        self.out.len() + self.inn.as_ref().map_or(0, LabelTable::len)
    }

    pub fn non_trivial_entries(&self) -> usize {
        let sides = if self.directed { 2 } else { 1 };
        self.total_entries() - sides * self.num_vertices()
    }

    pub fn avg_label_size(&self) -> f64 {
        self.total_entries() as f64 / self.num_vertices().max(1) as f64
    }

    /// How often each vertex appears as a non-trivial pivot.
    pub fn pivot_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_vertices()];
        for table in std::iter::once(&self.out).chain(self.inn.as_ref()) {
            for v in 0..table.num_vertices() as VertexId {
                for e in table.label(v) {
                    if e.pivot != v {
                        counts[e.pivot as usize] += 1;
                    }
                }
            }
        }
        counts
    }

    /// Approximate in-memory footprint of the label arrays.
    pub fn size_bytes(&self) -> usize {
        let table = |t: &LabelTable| t.offsets.len() * 8 + t.entries.len() * std::mem::size_of::<IndexEntry>();
        table(&self.out) + self.inn.as_ref().map_or(0, table)
    }
}

//! In-memory label construction.
//!
//! Labels grow iteratively. Iteration 1 seeds each vertex with its trivial
//! entry and one entry per incident edge; every later iteration joins the
//! entries that were new in the previous iteration (`prev`) either with single
//! edges (stepping) or with all current entries (doubling), keeps candidates
//! that strictly improve on what is stored, and prunes those already answered
//! through a higher-ranked pivot. The loop ends when an iteration adds nothing.
//!
//! An out-entry `(u -> v, d)` lives in `L_out(u)` and requires `v` to outrank
//! `u`; an in-entry `(u -> v, d)` lives in `L_in(v)` and requires `u` to
//! outrank `v`. Undirected graphs keep only the out side.

mod coverage;
mod engine;
mod index;

pub use coverage::{coverage_by_top, Coverage, CoverageTable, COVERAGE_TARGETS};
pub use engine::{
    build_index, generate_candidates, init_labels, prune_candidates, BuildOutcome, Candidate, CandidateSet, Labeler,
};
pub use index::{IndexEntry, LabelIndex, LabelTable};

use std::fmt;

use thiserror::Error;

use crate::graph::{Length, VertexId};

/// Construction-time label entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabelEntry {
    pub pivot: VertexId,
    pub dist: Length,
    /// Edge count of the path this entry stands for.
    pub hops: u16,
}

impl LabelEntry {
    pub fn trivial(v: VertexId) -> LabelEntry {
        LabelEntry { pivot: v, dist: 0, hops: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Out,
    In,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Out => Side::In,
            Side::In => Side::Out,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BuildMode {
    Stepping,
    Doubling,
    /// Stepping up to `switch_iteration`, doubling afterwards.
    #[default]
    Hybrid,
}

/// How a single generation round joins labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    Stepping,
    Doubling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationMode {
    Init,
    Stepping,
    Doubling,
}

impl From<StepMode> for IterationMode {
    fn from(m: StepMode) -> Self {
        match m {
            StepMode::Stepping => IterationMode::Stepping,
            StepMode::Doubling => IterationMode::Doubling,
        }
    }
}

impl fmt::Display for IterationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IterationMode::Init => "init",
            IterationMode::Stepping => "stepping",
            IterationMode::Doubling => "doubling",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildConfig {
    pub mode: BuildMode,
    pub switch_iteration: u32,
    /// Abort with [`BuildError::IterationLimit`] past this many iterations.
    pub max_iterations: Option<u32>,
    pub collect_stats: bool,
    /// Turning pruning off keeps every improving candidate; used by tests.
    pub prune: bool,
    /// Spread per-vertex work over threads (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            mode: BuildMode::Hybrid,
            switch_iteration: 10,
            max_iterations: None,
            collect_stats: true,
            prune: true,
            parallel: true,
        }
    }
}

impl BuildConfig {
    pub fn with_mode(mode: BuildMode) -> BuildConfig {
        BuildConfig { mode, ..BuildConfig::default() }
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        if self.switch_iteration < 1 {
            return Err(BuildError::Config("switch iteration must be at least 1".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(BuildError::Config("iteration cap must be at least 1".into()));
        }
        Ok(())
    }

    /// Join mode used by generation round `iteration` (2, 3, ...).
    pub fn mode_for(&self, iteration: u32) -> StepMode {
        match self.mode {
            BuildMode::Stepping => StepMode::Stepping,
            BuildMode::Doubling => StepMode::Doubling,
            BuildMode::Hybrid if iteration <= self.switch_iteration => StepMode::Stepping,
            BuildMode::Hybrid => StepMode::Doubling,
        }
    }
}

/// Counters for one iteration. Every generated candidate ends up in exactly
/// one of `discarded` (duplicate or not strictly better than a stored entry),
/// `pruned`, or `new_entries`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationStats {
    pub iteration: u32,
    pub mode: IterationMode,
    /// Size of `prev` going into this iteration.
    pub prev_entries: u64,
    pub candidates_generated: u64,
    pub candidates_discarded: u64,
    pub candidates_pruned: u64,
    pub new_entries: u64,
}

impl IterationStats {
    pub fn growing_factor(&self) -> f64 {
        self.candidates_generated as f64 / self.prev_entries.max(1) as f64
    }

    pub fn pruning_factor(&self) -> f64 {
        self.candidates_pruned as f64 / self.candidates_generated.max(1) as f64
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("ranking covers {got} vertices but the graph has {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("invalid build configuration: {0}")]
    Config(String),
    #[error("labels still changing after {limit} iterations")]
    IterationLimit { limit: u32, stats: Vec<IterationStats> },
}

/// Construction-time labels of every vertex, each list sorted by pivot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    directed: bool,
    out: Vec<Vec<LabelEntry>>,
    inn: Vec<Vec<LabelEntry>>,
}

impl Labels {
    pub(crate) fn empty(n: usize, directed: bool) -> Labels {
        Labels { directed, out: vec![Vec::new(); n], inn: if directed { vec![Vec::new(); n] } else { Vec::new() } }
    }

    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Sides that are stored: both for directed graphs, `Out` otherwise.
    pub fn sides(&self) -> &'static [Side] {
        if self.directed {
            &[Side::Out, Side::In]
        } else {
            &[Side::Out]
        }
    }

    #[inline]
    pub fn get(&self, side: Side, v: VertexId) -> &[LabelEntry] {
        &self.side(side)[v as usize]
    }

    pub fn find(&self, side: Side, v: VertexId, pivot: VertexId) -> Option<LabelEntry> {
        let l = self.get(side, v);
        l.binary_search_by_key(&pivot, |e| e.pivot).ok().map(|i| l[i])
    }

    pub(crate) fn side(&self, side: Side) -> &[Vec<LabelEntry>] {
        match side {
            Side::In if self.directed => &self.inn,
            _ => &self.out,
        }
    }

    pub(crate) fn side_mut(&mut self, side: Side) -> &mut Vec<Vec<LabelEntry>> {
        match side {
            Side::In if self.directed => &mut self.inn,
            _ => &mut self.out,
        }
    }

    /// Entries over the stored sides.
    pub fn len(&self) -> usize {
        self.out.iter().chain(&self.inn).map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every stored entry as `(side, owner, entry)`, sorted.
    pub fn iter(&self) -> impl Iterator<Item = (Side, VertexId, LabelEntry)> + '_ {
        self.sides().iter().flat_map(move |&s| {
            self.side(s).iter().enumerate().flat_map(move |(v, l)| l.iter().map(move |&e| (s, v as VertexId, e)))
        })
    }

    /// Drops hop counts and freezes into a [`LabelIndex`].
    pub fn to_index(&self, weighted: bool) -> LabelIndex {
        let table = |lists: &[Vec<LabelEntry>]| {
            LabelTable::from_lists(lists.iter().map(|l| l.iter().map(|e| IndexEntry { pivot: e.pivot, dist: e.dist })))
        };
        LabelIndex::new(self.directed, weighted, table(&self.out), self.directed.then(|| table(&self.inn)))
    }
}

/// State carried between iterations.
#[derive(Clone, Debug)]
pub struct IterationState {
    pub(crate) iteration: u32,
    pub(crate) all: Labels,
    pub(crate) prev: Labels,
    pub(crate) stats: Vec<IterationStats>,
}

impl IterationState {
    /// Number of the last completed iteration.
    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn all(&self) -> &Labels {
        &self.all
    }

    pub fn prev(&self) -> &Labels {
        &self.prev
    }

    pub fn stats(&self) -> &[IterationStats] {
        &self.stats
    }

    pub fn is_converged(&self) -> bool {
        self.prev.is_empty()
    }
}

//! Candidate generation, pruning and the iteration loop.
//!
//! Generation is organized by the owner of the candidate: for an out-side
//! owner `x` all four join shapes that can produce an entry of `L_out(x)` are
//! enumerated together, so owners are independent and can be processed in
//! parallel with a dense per-worker scratch array.
//!
//! * stepping: out-edge `(x -> u, w)` joined with `prev_out(u)`;
//! * doubling: old `(x -> u)` in `L_in(u)` joined with `prev_out(u)`, and
//!   old `(x -> u)` in `L_out(x)` joined with `prev_out(u)`.
//!
//! The in side mirrors this with in-edges, `L_out` and `prev_in`.

use crate::graph::{Graph, Length, RankAssignment, VertexId};
use crate::par;

use super::{
    BuildConfig, BuildError, IterationMode, IterationState, IterationStats, LabelEntry, LabelIndex, Labels, Side,
    StepMode,
};

const NONE: Length = Length::MAX;

/// Dense per-worker buffers, all indexed by vertex id.
pub(crate) struct Scratch {
    best: Vec<(Length, u16)>,
    touched: Vec<VertexId>,
    own: Vec<Length>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Scratch {
        Scratch { best: vec![(NONE, u16::MAX); n], touched: Vec::new(), own: vec![NONE; n] }
    }

    #[inline]
    fn offer(&mut self, pivot: VertexId, dist: Length, hops: u16) {
        let dist = dist.min(NONE - 1);
        let slot = &mut self.best[pivot as usize];
        if slot.0 == NONE {
            self.touched.push(pivot);
        }
        if (dist, hops) < *slot {
            *slot = (dist, hops);
        }
    }
}

/// `L(x)` densified into `own`, checked against the opposite-side label of
/// `pivot`: is there a pivot `w != pivot` with `own[w] + other(w) <= d`?
#[inline]
pub(crate) fn has_witness(own: &[Length], other: &[LabelEntry], pivot: VertexId, d: Length) -> bool {
    other.iter().any(|b| {
        let a = own[b.pivot as usize];
        b.pivot != pivot && a != NONE && a as u64 + b.dist as u64 <= d as u64
    })
}

fn fill(own: &mut [Length], label: &[LabelEntry]) {
    for e in label {
        own[e.pivot as usize] = e.dist;
    }
}

fn clear(own: &mut [Length], label: &[LabelEntry]) {
    for e in label {
        own[e.pivot as usize] = NONE;
    }
}

/// For each vertex x, the owners u (with distance and hops) whose label on
/// one side holds x as a non-trivial pivot.
struct Inverse {
    offsets: Vec<usize>,
    items: Vec<(VertexId, Length, u16)>,
}

impl Inverse {
    fn build(lists: &[Vec<LabelEntry>]) -> Inverse {
        let n = lists.len();
        let mut offsets = vec![0usize; n + 1];
        for (u, l) in lists.iter().enumerate() {
            for e in l.iter().filter(|e| e.pivot as usize != u) {
                offsets[e.pivot as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut items = vec![(0, 0, 0); offsets[n]];
        for (u, l) in lists.iter().enumerate() {
            for e in l.iter().filter(|e| e.pivot as usize != u) {
                let slot = &mut cursor[e.pivot as usize];
                items[*slot] = (u as VertexId, e.dist, e.hops);
                *slot += 1;
            }
        }
        Inverse { offsets, items }
    }

    #[inline]
    fn of(&self, x: VertexId) -> &[(VertexId, Length, u16)] {
        &self.items[self.offsets[x as usize]..self.offsets[x as usize + 1]]
    }
}

struct Inverses {
    out: Inverse,
    inn: Option<Inverse>,
}

impl Inverses {
    fn build(all: &Labels) -> Inverses {
        Inverses {
            out: Inverse::build(all.side(Side::Out)),
            inn: all.is_directed().then(|| Inverse::build(all.side(Side::In))),
        }
    }

    fn side(&self, side: Side) -> &Inverse {
        match side {
            Side::In => self.inn.as_ref().unwrap_or(&self.out),
            Side::Out => &self.out,
        }
    }
}

#[derive(Default)]
struct OwnerResult {
    entries: Vec<LabelEntry>,
    raw: u64,
    discarded: u64,
    pruned: u64,
}

struct Ctx<'a> {
    g: &'a Graph,
    r: &'a RankAssignment,
    all: &'a Labels,
    prev: &'a Labels,
    inv: Option<Inverses>,
    mode: StepMode,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a Graph, r: &'a RankAssignment, state: &'a IterationState, mode: StepMode) -> Ctx<'a> {
        let inv = (mode == StepMode::Doubling).then(|| Inverses::build(&state.all));
        Ctx { g, r, all: &state.all, prev: &state.prev, inv, mode }
    }

    /// Offers every raw candidate for `L_side(x)` into the scratch; returns
    /// how many were offered.
    fn gather(&self, s: &mut Scratch, side: Side, x: VertexId) -> u64 {
        let mut raw = 0u64;
        match self.mode {
            StepMode::Stepping => {
                let edges = match side {
                    Side::Out => self.g.out_edges(x),
                    Side::In => self.g.in_edges(x),
                };
                for (u, w) in edges.iter() {
                    for e in self.prev.get(side, u) {
                        if self.r.outranks(e.pivot, x) {
                            s.offer(e.pivot, e.dist.saturating_add(w), e.hops.saturating_add(1));
                            raw += 1;
                        }
                    }
                }
            }
            StepMode::Doubling => {
                let inv = self.inv.as_ref().expect("doubling needs inverse labels");
                for &(u, d1, h1) in inv.side(side.opposite()).of(x) {
                    for e in self.prev.get(side, u) {
                        if self.r.outranks(e.pivot, x) {
                            s.offer(e.pivot, e.dist.saturating_add(d1), e.hops.saturating_add(h1));
                            raw += 1;
                        }
                    }
                }
                for a in self.all.get(side, x).iter().filter(|a| a.pivot != x) {
                    for e in self.prev.get(side, a.pivot) {
                        s.offer(e.pivot, e.dist.saturating_add(a.dist), e.hops.saturating_add(a.hops));
                        raw += 1;
                    }
                }
            }
        }
        raw
    }

    /// Generates, filters and optionally prunes the candidates of one owner.
    fn process_owner(&self, s: &mut Scratch, side: Side, x: VertexId, prune: bool) -> OwnerResult {
        let raw = self.gather(s, side, x);
        if s.touched.is_empty() {
            return OwnerResult::default();
        }
        let Scratch { best, touched, own } = s;
        touched.sort_unstable();
        let label = self.all.get(side, x);
        fill(own, label);
        let mut out = OwnerResult { raw, discarded: raw - touched.len() as u64, ..OwnerResult::default() };
        for &p in touched.iter() {
            let (d, h) = std::mem::replace(&mut best[p as usize], (NONE, u16::MAX));
            if own[p as usize] <= d {
                out.discarded += 1;
            } else if prune && has_witness(own, self.all.get(side.opposite(), p), p, d) {
                out.pruned += 1;
            } else {
                out.entries.push(LabelEntry { pivot: p, dist: d, hops: h });
            }
        }
        touched.clear();
        clear(own, label);
        out
    }
}

/// Seeds trivial entries and one entry per edge; `prev` holds the edge
/// entries.
pub fn init_labels(g: &Graph, r: &RankAssignment) -> IterationState {
    let n = g.num_vertices();
    let mut all = Labels::empty(n, g.is_directed());
    let mut prev = Labels::empty(n, g.is_directed());
    for &side in all.sides() {
        for (v, l) in all.side_mut(side).iter_mut().enumerate() {
            l.push(LabelEntry::trivial(v as VertexId));
        }
    }
    let mut count = 0u64;
    for (u, v, w) in g.edges() {
        let (side, owner, pivot) = if r.outranks(v, u) {
            (Side::Out, u, v)
        } else if g.is_directed() {
            (Side::In, v, u)
        } else {
            (Side::Out, v, u)
        };
        prev.side_mut(side)[owner as usize].push(LabelEntry { pivot, dist: w, hops: 1 });
        count += 1;
    }
    for &side in prev.sides() {
        for (l, a) in prev.side_mut(side).iter_mut().zip(all.side_mut(side).iter_mut()) {
            l.sort_unstable_by_key(|e| e.pivot);
            a.extend_from_slice(l);
            a.sort_unstable_by_key(|e| e.pivot);
        }
    }
    let stats = vec![IterationStats {
        iteration: 1,
        mode: IterationMode::Init,
        prev_entries: 0,
        candidates_generated: count,
        candidates_discarded: 0,
        candidates_pruned: 0,
        new_entries: count,
    }];
    IterationState { iteration: 1, all, prev, stats }
}

/// One generated candidate after duplicate and improvement filtering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    pub side: Side,
    pub owner: VertexId,
    pub pivot: VertexId,
    pub dist: Length,
    pub hops: u16,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateSet {
    /// Sorted by (side, owner, pivot), one per key.
    pub entries: Vec<Candidate>,
    /// Raw candidates produced by the joins.
    pub generated: u64,
    /// Raw candidates dropped as duplicates or non-improving.
    pub discarded: u64,
}

/// Runs the joins of one round, without pruning.
pub fn generate_candidates(
    state: &IterationState,
    g: &Graph,
    r: &RankAssignment,
    mode: StepMode,
    parallel: bool,
) -> CandidateSet {
    let ctx = Ctx::new(g, r, state, mode);
    let n = g.num_vertices();
    let mut set = CandidateSet::default();
    for &side in state.all.sides() {
        let per_owner =
            par::map_indices(n, parallel, || Scratch::new(n), |s, x| ctx.process_owner(s, side, x as VertexId, false));
        for (x, res) in per_owner.into_iter().enumerate() {
            set.generated += res.raw;
            set.discarded += res.discarded;
            set.entries.extend(res.entries.into_iter().map(|e| Candidate {
                side,
                owner: x as VertexId,
                pivot: e.pivot,
                dist: e.dist,
                hops: e.hops,
            }));
        }
    }
    set
}

/// Keeps the candidates that no pivot of `all` already answers at the same
/// or a shorter distance. `all` is the label set from before the round.
pub fn prune_candidates(cands: &CandidateSet, all: &Labels, parallel: bool) -> Vec<Candidate> {
    let e = &cands.entries;
    let mut starts: Vec<usize> =
        (0..e.len()).filter(|&i| i == 0 || (e[i - 1].side, e[i - 1].owner) != (e[i].side, e[i].owner)).collect();
    starts.push(e.len());
    let n = all.num_vertices();
    let groups = par::map_indices(
        starts.len() - 1,
        parallel,
        || vec![NONE; n],
        |own, gi| {
            let group = &e[starts[gi]..starts[gi + 1]];
            let label = all.get(group[0].side, group[0].owner);
            fill(own, label);
            let kept: Vec<Candidate> = group
                .iter()
                .filter(|c| !has_witness(own, all.get(c.side.opposite(), c.pivot), c.pivot, c.dist))
                .copied()
                .collect();
            clear(own, label);
            kept
        },
    );
    groups.into_iter().flatten().collect()
}

/// Merges `fresh` (improving entries, sorted by pivot) into `label`,
/// replacing entries with the same pivot.
fn merge_into(label: &mut Vec<LabelEntry>, fresh: &[LabelEntry]) {
    if fresh.is_empty() {
        return;
    }
    let old = std::mem::take(label);
    let mut merged = Vec::with_capacity(old.len() + fresh.len());
    let (mut i, mut j) = (0, 0);
    while i < old.len() || j < fresh.len() {
        if j == fresh.len() || (i < old.len() && old[i].pivot < fresh[j].pivot) {
            merged.push(old[i]);
            i += 1;
        } else {
            if i < old.len() && old[i].pivot == fresh[j].pivot {
                i += 1;
            }
            merged.push(fresh[j]);
            j += 1;
        }
    }
    *label = merged;
}

/// Merges the surviving entries of a round into `all`, re-checks them against
/// the merged labels when `post_prune` is set, and makes the rest `prev`.
/// Returns the number of entries removed by the re-check.
fn commit(state: &mut IterationState, mut fresh: Vec<Vec<Vec<LabelEntry>>>, post_prune: bool, parallel: bool) -> u64 {
    let sides = state.all.sides();
    let n = state.all.num_vertices();
    for (si, &side) in sides.iter().enumerate() {
        let f = &fresh[si];
        par::for_each_mut(state.all.side_mut(side), parallel, |x, label| merge_into(label, &f[x]));
    }
    let mut removed = 0u64;
    if post_prune {
        // Flag everything against the merged labels before removing anything.
        let all = &state.all;
        let flags: Vec<Vec<Vec<VertexId>>> = sides
            .iter()
            .enumerate()
            .map(|(si, &side)| {
                let f = &fresh[si];
                par::map_indices(
                    n,
                    parallel,
                    || vec![NONE; n],
                    |own, x| {
                        if f[x].is_empty() {
                            return Vec::new();
                        }
                        let label = all.get(side, x as VertexId);
                        fill(own, label);
                        let hit: Vec<VertexId> = f[x]
                            .iter()
                            .filter(|e| has_witness(own, all.get(side.opposite(), e.pivot), e.pivot, e.dist))
                            .map(|e| e.pivot)
                            .collect();
                        clear(own, label);
                        hit
                    },
                )
            })
            .collect();
        for (si, &side) in sides.iter().enumerate() {
            let hits = &flags[si];
            removed += hits.iter().map(|h| h.len() as u64).sum::<u64>();
            par::for_each_mut(state.all.side_mut(side), parallel, |x, label| {
                if !hits[x].is_empty() {
                    label.retain(|e| hits[x].binary_search(&e.pivot).is_err());
                }
            });
            par::for_each_mut(&mut fresh[si], parallel, |x, list| {
                if !hits[x].is_empty() {
                    list.retain(|e| hits[x].binary_search(&e.pivot).is_err());
                }
            });
        }
    }
    let mut prev = Labels::empty(n, state.all.is_directed());
    for (si, &side) in sides.iter().enumerate() {
        *prev.side_mut(side) = std::mem::take(&mut fresh[si]);
    }
    state.prev = prev;
    removed
}

/// Output of a completed build.
#[derive(Clone, Debug)]
pub struct BuildOutcome {
    pub index: LabelIndex,
    /// Per-iteration counters, empty unless stats collection was enabled.
    pub stats: Vec<IterationStats>,
    /// Iterations run, including the final one that added nothing.
    pub iterations: u32,
    /// Last iteration that added at least one entry (0 for edgeless graphs).
    pub productive_iterations: u32,
}

/// Drives the build one iteration at a time.
pub struct Labeler<'a> {
    g: &'a Graph,
    r: &'a RankAssignment,
    cfg: BuildConfig,
    state: IterationState,
    last_productive: u32,
}

impl<'a> Labeler<'a> {
    pub fn new(g: &'a Graph, r: &'a RankAssignment, cfg: BuildConfig) -> Result<Labeler<'a>, BuildError> {
        cfg.validate()?;
        if r.len() != g.num_vertices() {
            return Err(BuildError::RankMismatch { expected: g.num_vertices(), got: r.len() });
        }
        let state = init_labels(g, r);
        let last_productive = u32::from(!state.prev.is_empty());
        Ok(Labeler { g, r, cfg, state, last_productive })
    }

    pub fn state(&self) -> &IterationState {
        &self.state
    }

    pub fn config(&self) -> &BuildConfig {
        &self.cfg
    }

    pub fn is_converged(&self) -> bool {
        self.state.is_converged()
    }

    /// Runs the next iteration with the configured schedule.
    pub fn step(&mut self) -> IterationStats {
        let mode = self.cfg.mode_for(self.state.iteration + 1);
        self.step_with(mode)
    }

    /// Runs the next iteration with an explicit join mode.
    pub fn step_with(&mut self, mode: StepMode) -> IterationStats {
        let n = self.g.num_vertices();
        let prune = self.cfg.prune;
        let parallel = self.cfg.parallel;
        let ctx = Ctx::new(self.g, self.r, &self.state, mode);
        let mut fresh = Vec::new();
        let (mut raw, mut discarded, mut pruned) = (0u64, 0u64, 0u64);
        for &side in self.state.all.sides() {
            let per_owner = par::map_indices(
                n,
                parallel,
                || Scratch::new(n),
                |s, x| ctx.process_owner(s, side, x as VertexId, prune),
            );
            let mut lists = Vec::with_capacity(n);
            for res in per_owner {
                raw += res.raw;
                discarded += res.discarded;
                pruned += res.pruned;
                lists.push(res.entries);
            }
            fresh.push(lists);
        }
        drop(ctx);
        self.finish_round(mode, fresh, raw, discarded, pruned)
    }

    /// Same round as [`Labeler::step_with`], assembled from the standalone
    /// [`generate_candidates`] and [`prune_candidates`] passes.
    pub fn step_unfused(&mut self, mode: StepMode) -> IterationStats {
        let parallel = self.cfg.parallel;
        let cands = generate_candidates(&self.state, self.g, self.r, mode, parallel);
        let kept =
            if self.cfg.prune { prune_candidates(&cands, &self.state.all, parallel) } else { cands.entries.clone() };
        let pruned = (cands.entries.len() - kept.len()) as u64;
        let n = self.g.num_vertices();
        let sides = self.state.all.sides();
        let mut fresh: Vec<Vec<Vec<LabelEntry>>> = sides.iter().map(|_| vec![Vec::new(); n]).collect();
        for c in kept {
            let si = sides.iter().position(|&s| s == c.side).expect("candidate side is stored");
            fresh[si][c.owner as usize].push(LabelEntry { pivot: c.pivot, dist: c.dist, hops: c.hops });
        }
        self.finish_round(mode, fresh, cands.generated, cands.discarded, pruned)
    }

    fn finish_round(
        &mut self,
        mode: StepMode,
        fresh: Vec<Vec<Vec<LabelEntry>>>,
        raw: u64,
        discarded: u64,
        pruned: u64,
    ) -> IterationStats {
        let prev_entries = self.state.prev.len() as u64;
        let removed = commit(&mut self.state, fresh, self.cfg.prune, self.cfg.parallel);
        self.state.iteration += 1;
        let new_entries = self.state.prev.len() as u64;
        if new_entries > 0 {
            self.last_productive = self.state.iteration;
        }
        let stats = IterationStats {
            iteration: self.state.iteration,
            mode: mode.into(),
            prev_entries,
            candidates_generated: raw,
            candidates_discarded: discarded,
            candidates_pruned: pruned + removed,
            new_entries,
        };
        self.state.stats.push(stats);
        stats
    }

    /// Iterates until no entry changes.
    pub fn run(mut self) -> Result<BuildOutcome, BuildError> {
        while !self.is_converged() {
            if let Some(limit) = self.cfg.max_iterations {
                if self.state.iteration >= limit {
                    return Err(BuildError::IterationLimit { limit, stats: self.state.stats });
                }
            }
            self.step();
        }
        Ok(self.finish())
    }

    /// Freezes the current labels, converged or not.
    pub fn finish(self) -> BuildOutcome {
        BuildOutcome {
            index: self.state.all.to_index(self.g.is_weighted()),
            stats: if self.cfg.collect_stats { self.state.stats } else { Vec::new() },
            iterations: self.state.iteration,
            productive_iterations: self.last_productive,
        }
    }
}

pub fn build_index(g: &Graph, r: &RankAssignment, cfg: &BuildConfig) -> Result<BuildOutcome, BuildError> {
    Labeler::new(g, r, *cfg)?.run()
}

use std::io;
use std::path::{Path, PathBuf};

use crate::graph::{Graph, RankAssignment, VertexId};
use crate::labeling::{BuildConfig, BuildError, IndexEntry, IterationMode, IterationState, IterationStats, Side};

use super::disk::{write_index_file, DistWidth, IndexHeader, SideSource};
use super::generate::extmem_generate;
use super::prune::{extmem_prune, merge_final, merge_improvements};
use super::run::{IoCounts, RunFile, RunRecord, RunStore};
use super::{ExtmemError, MemoryBudget};

/// Run files describing the labels between two rounds.
#[derive(Debug)]
pub struct LabelRuns {
    directed: bool,
    all: Vec<RunFile>,
    prev: Vec<RunFile>,
    /// Edges keyed by source.
    edges_out: RunFile,
    /// Edges keyed by target; directed graphs only.
    edges_in: Option<RunFile>,
}

fn slot(directed: bool, side: Side) -> usize {
    usize::from(directed && side == Side::In)
}

impl LabelRuns {
    pub fn sides(&self) -> &'static [Side] {
        if self.directed {
            &[Side::Out, Side::In]
        } else {
            &[Side::Out]
        }
    }

    pub fn all(&self, side: Side) -> &RunFile {
        &self.all[slot(self.directed, side)]
    }

    pub fn prev(&self, side: Side) -> &RunFile {
        &self.prev[slot(self.directed, side)]
    }

    /// Edges grouped by the vertex a `side` entry is extended from: edges
    /// into it for out-entries, edges out of it for in-entries.
    pub fn edges_into(&self, side: Side) -> &RunFile {
        match side {
            Side::Out => self.edges_in.as_ref().unwrap_or(&self.edges_out),
            Side::In => &self.edges_out,
        }
    }

    pub fn prev_len(&self) -> u64 {
        self.prev.iter().map(RunFile::len).sum()
    }

    pub fn all_len(&self) -> u64 {
        self.all.iter().map(RunFile::len).sum()
    }

    /// Writes an in-memory state to runs, for running single passes against
    /// the same input as the in-memory engine.
    pub fn from_state(store: &RunStore, g: &Graph, state: &IterationState) -> Result<LabelRuns, ExtmemError> {
        let dump = |labels: &crate::labeling::Labels, side: Side, name: &str| -> io::Result<RunFile> {
            let recs = (0..labels.num_vertices()).flat_map(|x| {
                labels.get(side, x as VertexId).iter().map(move |e| RunRecord {
                    owner: x as VertexId,
                    pivot: e.pivot,
                    dist: e.dist,
                    hops: e.hops,
                    side,
                })
            });
            store.write_all(name, recs)
        };
        let sides = state.all().sides();
        let all = sides.iter().map(|&s| dump(state.all(), s, "all")).collect::<io::Result<Vec<_>>>()?;
        let prev = sides.iter().map(|&s| dump(state.prev(), s, "prev")).collect::<io::Result<Vec<_>>>()?;
        let (edges_out, edges_in) = edge_runs(store, g)?;
        Ok(LabelRuns { directed: g.is_directed(), all, prev, edges_out, edges_in })
    }

    fn discard(self, store: &RunStore) -> io::Result<()> {
        for run in self.all.into_iter().chain(self.prev).chain([self.edges_out]).chain(self.edges_in) {
            store.remove(run)?;
        }
        Ok(())
    }
}

fn edge_runs(store: &RunStore, g: &Graph) -> io::Result<(RunFile, Option<RunFile>)> {
    let n = g.num_vertices() as VertexId;
    let edge = |owner, pivot, dist| RunRecord { owner, pivot, dist, hops: 1, side: Side::Out };
    let out =
        store.write_all("edges-out", (0..n).flat_map(|u| g.out_edges(u).iter().map(move |(v, w)| edge(u, v, w))))?;
    let inn = if g.is_directed() {
        Some(store.write_all("edges-in", (0..n).flat_map(|v| g.in_edges(v).iter().map(move |(u, w)| edge(v, u, w))))?)
    } else {
        None
    };
    Ok((out, inn))
}

/// Seeds the runs the same way as the in-memory engine: a trivial entry per
/// vertex and side, plus one entry per edge, which also forms `prev`.
pub fn init_runs(store: &RunStore, g: &Graph, r: &RankAssignment) -> Result<LabelRuns, ExtmemError> {
    let n = g.num_vertices() as VertexId;
    let (edges_out, edges_in) = edge_runs(store, g)?;
    let sides: &[Side] = if g.is_directed() { &[Side::Out, Side::In] } else { &[Side::Out] };
    let mut all = Vec::new();
    let mut prev = Vec::new();
    let mut group = Vec::new();
    for &side in sides {
        let mut a = store.create("all")?;
        let mut p = store.create("prev")?;
        for x in 0..n {
            group.clear();
            // Out-entries of x come from its out-edges towards higher ranks;
            // in-entries from in-edges whose source is not lower.
            let edges = match side {
                Side::Out => g.out_edges(x),
                Side::In => g.in_edges(x),
            };
            for (y, w) in edges.iter() {
                let keep = match side {
                    Side::Out => r.outranks(y, x),
                    Side::In => !r.outranks(x, y),
                };
                if keep {
                    group.push(RunRecord { owner: x, pivot: y, dist: w, hops: 1, side });
                }
            }
            let trivial = RunRecord { owner: x, pivot: x, dist: 0, hops: 0, side };
            let at = group.partition_point(|e| e.pivot < x);
            for (i, e) in group.iter().enumerate() {
                if i == at {
                    a.push(&trivial)?;
                }
                a.push(e)?;
                p.push(e)?;
            }
            if at == group.len() {
                a.push(&trivial)?;
            }
        }
        all.push(a.finish()?);
        prev.push(p.finish()?);
    }
    Ok(LabelRuns { directed: g.is_directed(), all, prev, edges_out, edges_in })
}

#[derive(Clone, Debug)]
pub struct ExtmemOptions {
    pub budget: MemoryBudget,
    /// Holds the run files; locked for the duration of the build.
    pub workdir: PathBuf,
    pub width: DistWidth,
}

/// Block transfers of one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationIo {
    pub iteration: u32,
    pub reads: u64,
    pub writes: u64,
    /// Raw candidates generated.
    pub candidates: u64,
    pub pruned: u64,
    pub new_entries: u64,
}

#[derive(Clone, Debug)]
pub struct ExtmemOutcome {
    pub stats: Vec<IterationStats>,
    pub io: Vec<IterationIo>,
    pub iterations: u32,
    pub productive_iterations: u32,
    pub total_io: IoCounts,
    pub header: IndexHeader,
}

/// Builds the index within `opts.budget` and writes it to `out`.
///
/// Rounds follow the in-memory engine exactly (same schedule, filters and
/// re-check), so the file equals the one written from [`crate::build_index`]
/// byte for byte.
pub fn extmem_build(
    g: &Graph,
    r: &RankAssignment,
    cfg: &BuildConfig,
    opts: &ExtmemOptions,
    out: &Path,
) -> Result<ExtmemOutcome, ExtmemError> {
    cfg.validate()?;
    if r.len() != g.num_vertices() {
        return Err(BuildError::RankMismatch { expected: g.num_vertices(), got: r.len() }.into());
    }
    let store = RunStore::open(&opts.workdir, opts.budget)?;
    let mut runs = init_runs(&store, g, r)?;
    let init = runs.prev_len();
    let mut stats = vec![IterationStats {
        iteration: 1,
        mode: IterationMode::Init,
        prev_entries: 0,
        candidates_generated: init,
        candidates_discarded: 0,
        candidates_pruned: 0,
        new_entries: init,
    }];
    let mut io = vec![IterationIo {
        iteration: 1,
        reads: store.io().reads,
        writes: store.io().writes,
        candidates: init,
        pruned: 0,
        new_entries: init,
    }];
    describe(&store, &runs, 1);
    let mut iteration = 1u32;
    let mut last_productive = u32::from(init > 0);
    while runs.prev_len() > 0 {
        if let Some(limit) = cfg.max_iterations {
            if iteration >= limit {
                return Err(BuildError::IterationLimit { limit, stats }.into());
            }
        }
        let before = store.io();
        let mode = cfg.mode_for(iteration + 1);
        let prev_entries = runs.prev_len();
        let (next, counts) = round(&store, &runs, r, mode, cfg.prune)?;
        runs.discard_labels(&store)?;
        runs.all = next.all;
        runs.prev = next.prev;
        iteration += 1;
        let new_entries = runs.prev_len();
        if new_entries > 0 {
            last_productive = iteration;
        }
        describe(&store, &runs, iteration);
        stats.push(IterationStats {
            iteration,
            mode: mode.into(),
            prev_entries,
            candidates_generated: counts.raw,
            candidates_discarded: counts.raw - counts.cands,
            candidates_pruned: counts.cands - new_entries,
            new_entries,
        });
        let moved = store.io() - before;
        io.push(IterationIo {
            iteration,
            reads: moved.reads,
            writes: moved.writes,
            candidates: counts.raw,
            pruned: counts.cands - new_entries,
            new_entries,
        });
    }
    let header = write_runs_index(&store, &runs, g, opts.width, out)?;
    let total_io = store.io();
    runs.discard(&store)?;
    store.close();
    Ok(ExtmemOutcome {
        stats: if cfg.collect_stats { stats } else { Vec::new() },
        io,
        iterations: iteration,
        productive_iterations: last_productive,
        total_io,
        header,
    })
}

impl LabelRuns {
    fn discard_labels(&mut self, store: &RunStore) -> io::Result<()> {
        for run in self.all.drain(..).chain(self.prev.drain(..)) {
            store.remove(run)?;
        }
        Ok(())
    }
}

fn describe(store: &RunStore, runs: &LabelRuns, iteration: u32) {
    for &side in runs.sides() {
        store.describe(runs.all(side), "all", side, iteration);
        store.describe(runs.prev(side), "prev", side, iteration);
    }
}

struct RoundCounts {
    raw: u64,
    /// Candidates left after duplicate and improvement filtering.
    cands: u64,
}

struct NextRuns {
    all: Vec<RunFile>,
    prev: Vec<RunFile>,
}

/// One round: generate and prune per side, merge, re-check against the
/// merged labels, and drop what the re-check flags.
fn round(
    store: &RunStore,
    runs: &LabelRuns,
    r: &RankAssignment,
    mode: crate::labeling::StepMode,
    prune: bool,
) -> Result<(NextRuns, RoundCounts), ExtmemError> {
    let sides = runs.sides();
    let mut counts = RoundCounts { raw: 0, cands: 0 };
    let mut surv = Vec::new();
    for &side in sides {
        let (cand, raw) = extmem_generate(store, runs, r, side, mode)?;
        counts.raw += raw;
        counts.cands += cand.len();
        surv.push(cand);
    }
    if prune {
        let mut kept = Vec::new();
        for (i, &side) in sides.iter().enumerate() {
            let (s, _) = extmem_prune(store, &surv[i], runs.all(side), runs.all(side.opposite()))?;
            kept.push(s);
        }
        for c in std::mem::replace(&mut surv, kept) {
            store.remove(c)?;
        }
    }
    let merged = sides
        .iter()
        .enumerate()
        .map(|(i, &side)| merge_improvements(store, runs.all(side), &surv[i]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut next = NextRuns { all: Vec::new(), prev: Vec::new() };
    if prune {
        let merged_of = |side: Side| &merged[slot(runs.directed, side)];
        let mut rechecked = Vec::new();
        for (i, &side) in sides.iter().enumerate() {
            let (s, _) = extmem_prune(store, &surv[i], merged_of(side), merged_of(side.opposite()))?;
            rechecked.push(s);
        }
        for (i, &side) in sides.iter().enumerate() {
            next.all.push(merge_final(store, runs.all(side), &surv[i], &rechecked[i])?);
        }
        for run in merged.into_iter().chain(surv) {
            store.remove(run)?;
        }
        next.prev = rechecked;
    } else {
        next.prev = surv;
        next.all = merged;
    }
    Ok((next, counts))
}

fn run_source<'a>(store: &'a RunStore, run: &RunFile, n: usize) -> io::Result<SideSource<'a>> {
    let mut offsets = vec![0u64; n + 1];
    let mut reader = store.open_run(run)?;
    while let Some(rec) = reader.next_record()? {
        offsets[rec.owner as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut reader = store.open_run(run)?;
    let entries = std::iter::from_fn(move || match reader.next_record() {
        Ok(Some(rec)) => Some(Ok((rec.owner, IndexEntry { pivot: rec.pivot, dist: rec.dist }))),
        Ok(None) => None,
        Err(e) => Some(Err(e)),
    });
    Ok(SideSource { offsets, entries: Box::new(entries) })
}

fn write_runs_index(
    store: &RunStore,
    runs: &LabelRuns,
    g: &Graph,
    width: DistWidth,
    out: &Path,
) -> Result<IndexHeader, ExtmemError> {
    let n = g.num_vertices();
    let header = IndexHeader {
        directed: g.is_directed(),
        weighted: g.is_weighted(),
        width,
        has_bp: false,
        n: n as u64,
        out_count: runs.all(Side::Out).len(),
        in_count: if g.is_directed() { runs.all(Side::In).len() } else { 0 },
    };
    let out_src = run_source(store, runs.all(Side::Out), n)?;
    let in_src = if g.is_directed() { Some(run_source(store, runs.all(Side::In), n)?) } else { None };
    write_index_file(out, header, out_src, in_src, None)?;
    Ok(header)
}

use crate::graph::{Length, RankAssignment, VertexId};
use crate::labeling::{Side, StepMode};

use super::build::LabelRuns;
use super::run::{KeyedBlocks, RunFile, RunRecord, RunStore};
use super::ExtmemError;

const NONE: Length = Length::MAX;

#[inline]
fn cand(side: Side, owner: VertexId, pivot: VertexId, d1: Length, d2: Length, h1: u16, h2: u16) -> RunRecord {
    RunRecord { owner, pivot, dist: d1.saturating_add(d2).min(NONE - 1), hops: h1.saturating_add(h2), side }
}

/// Candidate generation for one side of one round.
///
/// Outer loop: blocks of `prev_side(k)` groups, each with the records keyed
/// by the same `k` that extend them (edges into `k` when stepping, the
/// opposite-side label of `k` when doubling). Inner loop, doubling only:
/// one pass over `all_side` per block, extending owners whose label holds a
/// block key as pivot. Raw candidates go through a bounded external sort
/// that keeps the best record per (owner, pivot); a final merge with
/// `all_side` drops candidates that do not strictly improve.
///
/// Returns the candidate run and the number of raw candidates.
pub fn extmem_generate(
    store: &RunStore,
    runs: &LabelRuns,
    r: &RankAssignment,
    side: Side,
    mode: StepMode,
) -> Result<(RunFile, u64), ExtmemError> {
    let budget = *store.budget();
    let co_run = match mode {
        StepMode::Stepping => runs.edges_into(side),
        StepMode::Doubling => runs.all(side.opposite()),
    };
    let mut blocks = KeyedBlocks::new(store.open_run(runs.prev(side))?, store.open_run(co_run)?, budget.outer_bytes());
    let mut sorter = store.sorter("cand-raw", true);
    let mut raw = 0u64;
    let mut group = Vec::new();
    while let Some(block) = blocks.next_block()? {
        for i in 0..block.keys.len() {
            let k = block.keys[i];
            for c in block.co_of(i) {
                let x = c.pivot;
                if x == k {
                    continue;
                }
                for e in block.main_of(i) {
                    if r.outranks(e.pivot, x) {
                        sorter.push(cand(side, x, e.pivot, e.dist, c.dist, e.hops, c.hops))?;
                        raw += 1;
                    }
                }
            }
        }
        if mode == StepMode::Doubling {
            let mut all = store.open_run(runs.all(side))?;
            loop {
                group.clear();
                let Some(x) = all.next_group(&mut group, budget.group_bytes())? else { break };
                for a in group.iter().filter(|a| a.pivot != x) {
                    let Ok(i) = block.keys.binary_search(&a.pivot) else { continue };
                    for e in block.main_of(i) {
                        sorter.push(cand(side, x, e.pivot, e.dist, a.dist, e.hops, a.hops))?;
                        raw += 1;
                    }
                }
            }
        }
    }
    drop(blocks);
    let deduped = sorter.finish()?;
    let filtered = keep_improving(store, &deduped, runs.all(side))?;
    store.remove(deduped)?;
    Ok((filtered, raw))
}

/// Drops every candidate whose key already has an entry at the same or a
/// shorter distance.
fn keep_improving(store: &RunStore, cands: &RunFile, all: &RunFile) -> Result<RunFile, ExtmemError> {
    let mut c = store.open_run(cands)?;
    let mut a = store.open_run(all)?;
    let mut out = store.create("cand")?;
    while let Some(rec) = c.next_record()? {
        while a.peek()?.is_some_and(|e| e.key() < rec.key()) {
            a.next_record()?;
        }
        match a.peek()? {
            Some(e) if e.key() == rec.key() && e.dist <= rec.dist => {}
            _ => out.push(&rec)?,
        }
    }
    Ok(out.finish()?)
}

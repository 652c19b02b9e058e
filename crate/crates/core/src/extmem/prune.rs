use crate::graph::VertexId;

use super::run::{KeyedBlocks, RunFile, RunReader, RunRecord, RunStore};
use super::ExtmemError;

/// Is there a pivot `w != pivot` in both labels with `a(w) + b(w) <= d`?
fn witness(a: &[RunRecord], b: &[RunRecord], pivot: VertexId, d: u32) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].pivot.cmp(&b[j].pivot) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i].pivot != pivot && a[i].dist as u64 + b[j].dist as u64 <= d as u64 {
                    return true;
                }
                i += 1;
                j += 1;
            }
        }
    }
    false
}

/// Drops candidates `(x, p, d)` for which `own(x)` and `other(p)` already
/// hold a path of length at most `d` through another pivot. `own` is the
/// label run of the candidates' side, `other` the opposite side.
///
/// Outer loop: blocks of candidate groups with the `own` group of the same
/// owner. Inner loop: one pass over `other` per block, checking each group
/// against the block's candidates with that pivot.
///
/// Returns the surviving run and the number dropped.
pub fn extmem_prune(
    store: &RunStore,
    cands: &RunFile,
    own: &RunFile,
    other: &RunFile,
) -> Result<(RunFile, u64), ExtmemError> {
    let budget = *store.budget();
    let mut blocks = KeyedBlocks::new(store.open_run(cands)?, store.open_run(own)?, budget.outer_bytes());
    let mut out = store.create("surv")?;
    let mut pruned = 0u64;
    let mut by_pivot: Vec<(VertexId, usize, usize)> = Vec::new();
    let mut flags = Vec::new();
    let mut group = Vec::new();
    while let Some(block) = blocks.next_block()? {
        by_pivot.clear();
        for ki in 0..block.keys.len() {
            for ci in block.main_range(ki) {
                by_pivot.push((block.main()[ci].pivot, ci, ki));
            }
        }
        by_pivot.sort_unstable();
        flags.clear();
        flags.resize(block.main().len(), false);
        let mut b = store.open_run(other)?;
        loop {
            group.clear();
            let Some(p) = b.next_group(&mut group, budget.group_bytes())? else { break };
            let lo = by_pivot.partition_point(|e| e.0 < p);
            for &(_, ci, ki) in by_pivot[lo..].iter().take_while(|e| e.0 == p) {
                let c = block.main()[ci];
                if witness(block.co_of(ki), &group, p, c.dist) {
                    flags[ci] = true;
                }
            }
        }
        for (c, &f) in block.main().iter().zip(&flags) {
            if f {
                pruned += 1;
            } else {
                out.push(c)?;
            }
        }
    }
    Ok((out.finish()?, pruned))
}

fn advance(r: &mut RunReader) -> Result<Option<RunRecord>, ExtmemError> {
    Ok(r.next_record()?)
}

/// `all` with every key of `fresh` replaced or added.
pub fn merge_improvements(store: &RunStore, all: &RunFile, fresh: &RunFile) -> Result<RunFile, ExtmemError> {
    let mut a = store.open_run(all)?;
    let mut f = store.open_run(fresh)?;
    let mut out = store.create("merged")?;
    let (mut x, mut y) = (advance(&mut a)?, advance(&mut f)?);
    loop {
        let take_fresh = match (x, y) {
            (None, None) => break,
            (Some(e), Some(c)) => c.key() <= e.key(),
            (None, Some(_)) => true,
            (Some(_), None) => false,
        };
        if take_fresh {
            let c = y.expect("fresh record");
            out.push(&c)?;
            if x.is_some_and(|e| e.key() == c.key()) {
                x = advance(&mut a)?;
            }
            y = advance(&mut f)?;
        } else {
            out.push(&x.expect("old record"))?;
            x = advance(&mut a)?;
        }
    }
    Ok(out.finish()?)
}

/// `all` after a round: keys of `fresh` take their `kept` record, or vanish
/// when the re-check removed them; other keys keep their old record.
pub fn merge_final(store: &RunStore, all: &RunFile, fresh: &RunFile, kept: &RunFile) -> Result<RunFile, ExtmemError> {
    let mut a = store.open_run(all)?;
    let mut f = store.open_run(fresh)?;
    let mut k = store.open_run(kept)?;
    let mut out = store.create("all")?;
    let (mut x, mut y) = (advance(&mut a)?, advance(&mut f)?);
    loop {
        let key = match (x, y) {
            (None, None) => break,
            (Some(e), None) => e.key(),
            (None, Some(c)) => c.key(),
            (Some(e), Some(c)) => e.key().min(c.key()),
        };
        if y.is_some_and(|c| c.key() == key) {
            while k.peek()?.is_some_and(|r| r.key() < key) {
                k.next_record()?;
            }
            if let Some(r) = k.peek()?.filter(|r| r.key() == key) {
                out.push(&r)?;
            }
            y = advance(&mut f)?;
            if x.is_some_and(|e| e.key() == key) {
                x = advance(&mut a)?;
            }
        } else {
            out.push(&x.expect("key comes from all"))?;
            x = advance(&mut a)?;
        }
    }
    Ok(out.finish()?)
}

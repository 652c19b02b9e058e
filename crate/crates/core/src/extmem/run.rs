use std::cell::{Cell, RefCell};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::rc::Rc;

use crate::graph::{Length, VertexId};
use crate::labeling::Side;

use super::{ExtmemError, MemoryBudget};

/// owner u32, pivot u32, dist u32, hops u16, side u8; little-endian.
pub const RECORD_BYTES: usize = 15;

const LOCK_FILE: &str = "LOCK";
const MANIFEST_FILE: &str = "MANIFEST";

/// One label entry or candidate on disk. Ordering is by (owner, pivot) first,
/// so a sorted run keeps the smallest distance (then fewest hops) first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunRecord {
    pub owner: VertexId,
    pub pivot: VertexId,
    pub dist: Length,
    pub hops: u16,
    pub side: Side,
}

impl RunRecord {
    fn encode(&self) -> [u8; RECORD_BYTES] {
        let mut b = [0u8; RECORD_BYTES];
        b[0..4].copy_from_slice(&self.owner.to_le_bytes());
        b[4..8].copy_from_slice(&self.pivot.to_le_bytes());
        b[8..12].copy_from_slice(&self.dist.to_le_bytes());
        b[12..14].copy_from_slice(&self.hops.to_le_bytes());
        b[14] = match self.side {
            Side::Out => 0,
            Side::In => 1,
        };
        b
    }

    fn decode(b: &[u8; RECORD_BYTES]) -> io::Result<RunRecord> {
        let u32_at = |i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        let side = match b[14] {
            0 => Side::Out,
            1 => Side::In,
            x => return Err(io::Error::new(io::ErrorKind::InvalidData, format!("bad side byte {x}"))),
        };
        Ok(RunRecord {
            owner: u32_at(0),
            pivot: u32_at(4),
            dist: u32_at(8),
            hops: u16::from_le_bytes([b[12], b[13]]),
            side,
        })
    }

    #[inline]
    pub fn key(&self) -> (VertexId, VertexId) {
        (self.owner, self.pivot)
    }

    #[inline]
    pub fn is_trivial(&self) -> bool {
        self.owner == self.pivot
    }
}

/// Blocks moved, counted per stream as `ceil(bytes / B)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IoCounts {
    pub reads: u64,
    pub writes: u64,
}

impl std::ops::Sub for IoCounts {
    type Output = IoCounts;
    fn sub(self, o: IoCounts) -> IoCounts {
        IoCounts { reads: self.reads - o.reads, writes: self.writes - o.writes }
    }
}

#[derive(Debug, Default)]
struct Counters {
    reads: Cell<u64>,
    writes: Cell<u64>,
}

/// A finished, sorted run on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunFile {
    path: PathBuf,
    records: u64,
}

impl RunFile {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> u64 {
        self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records == 0
    }
}

pub struct RunWriter {
    w: BufWriter<File>,
    path: PathBuf,
    records: u64,
    block: u64,
    io: Rc<Counters>,
}

impl RunWriter {
    pub fn push(&mut self, rec: &RunRecord) -> io::Result<()> {
        self.records += 1;
        self.w.write_all(&rec.encode())
    }

    pub fn finish(mut self) -> io::Result<RunFile> {
        self.w.flush()?;
        let bytes = self.records * RECORD_BYTES as u64;
        self.io.writes.set(self.io.writes.get() + bytes.div_ceil(self.block));
        Ok(RunFile { path: self.path, records: self.records })
    }
}

/// Sequential reader with one record of lookahead.
pub struct RunReader {
    r: BufReader<File>,
    left: u64,
    read: u64,
    peeked: Option<RunRecord>,
    block: u64,
    io: Rc<Counters>,
}

impl RunReader {
    pub fn peek(&mut self) -> io::Result<Option<RunRecord>> {
        if self.peeked.is_none() && self.left > 0 {
            let mut b = [0u8; RECORD_BYTES];
            self.r.read_exact(&mut b)?;
            self.left -= 1;
            self.read += 1;
            self.peeked = Some(RunRecord::decode(&b)?);
        }
        Ok(self.peeked)
    }

    pub fn next_record(&mut self) -> io::Result<Option<RunRecord>> {
        self.peek()?;
        Ok(self.peeked.take())
    }

    /// Appends every record of the next owner to `out`, failing once the
    /// group would exceed `limit` bytes. Returns the owner, or `None` at the
    /// end of the run.
    pub fn next_group(&mut self, out: &mut Vec<RunRecord>, limit: usize) -> Result<Option<VertexId>, ExtmemError> {
        let Some(first) = self.peek()? else { return Ok(None) };
        let start = out.len();
        while let Some(rec) = self.peek()? {
            if rec.owner != first.owner {
                break;
            }
            if (out.len() - start + 1) * RECORD_BYTES > limit {
                return Err(ExtmemError::GroupExceedsBudget {
                    vertex: first.owner,
                    bytes: (out.len() - start + 1) * RECORD_BYTES,
                    limit,
                });
            }
            out.push(rec);
            self.peeked = None;
        }
        Ok(Some(first.owner))
    }

    /// Skips groups whose owner is below `owner`.
    pub fn skip_below(&mut self, owner: VertexId) -> io::Result<()> {
        while let Some(rec) = self.peek()? {
            if rec.owner >= owner {
                break;
            }
            self.peeked = None;
        }
        Ok(())
    }
}

impl Drop for RunReader {
    fn drop(&mut self) {
        let bytes = self.read * RECORD_BYTES as u64;
        self.io.reads.set(self.io.reads.get() + bytes.div_ceil(self.block));
    }
}

/// Owns a work directory for one build: its lock, manifest and run files.
/// Files still registered when the store is dropped are deleted, so failed
/// builds leave nothing behind.
pub struct RunStore {
    dir: PathBuf,
    budget: MemoryBudget,
    io: Rc<Counters>,
    files: RefCell<Vec<PathBuf>>,
    manifest: RefCell<BufWriter<File>>,
    seq: Cell<u64>,
}

impl RunStore {
    pub fn open(dir: &Path, budget: MemoryBudget) -> Result<RunStore, ExtmemError> {
        fs::create_dir_all(dir)?;
        let lock = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => writeln!(f, "{}", std::process::id())?,
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(ExtmemError::Locked(dir.to_path_buf())),
            Err(e) => return Err(e.into()),
        }
        let manifest = match File::create(dir.join(MANIFEST_FILE)) {
            Ok(f) => f,
            Err(e) => {
                let _ = fs::remove_file(&lock);
                return Err(e.into());
            }
        };
        let store = RunStore {
            dir: dir.to_path_buf(),
            budget,
            io: Rc::default(),
            files: RefCell::default(),
            manifest: RefCell::new(BufWriter::new(manifest)),
            seq: Cell::new(0),
        };
        store.note("# file role side iteration records; every run sorted by owner, pivot");
        Ok(store)
    }

    pub fn budget(&self) -> &MemoryBudget {
        &self.budget
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn io(&self) -> IoCounts {
        IoCounts { reads: self.io.reads.get(), writes: self.io.writes.get() }
    }

    /// Appends a line to the manifest.
    pub fn note(&self, line: &str) {
        let mut m = self.manifest.borrow_mut();
        let _ = writeln!(m, "{line}").and_then(|_| m.flush());
    }

    /// Starts a new run; `name` becomes part of the file name.
    pub fn create(&self, name: &str) -> io::Result<RunWriter> {
        let seq = self.seq.get();
        self.seq.set(seq + 1);
        let path = self.dir.join(format!("{seq:06}-{name}.run"));
        let file = File::create(&path)?;
        self.files.borrow_mut().push(path.clone());
        Ok(RunWriter {
            w: BufWriter::with_capacity(self.budget.block_bytes(), file),
            path,
            records: 0,
            block: self.budget.block_bytes() as u64,
            io: self.io.clone(),
        })
    }

    pub fn open_run(&self, run: &RunFile) -> io::Result<RunReader> {
        let file = File::open(&run.path)?;
        Ok(RunReader {
            r: BufReader::with_capacity(self.budget.block_bytes(), file),
            left: run.records,
            read: 0,
            peeked: None,
            block: self.budget.block_bytes() as u64,
            io: self.io.clone(),
        })
    }

    pub fn remove(&self, run: RunFile) -> io::Result<()> {
        self.files.borrow_mut().retain(|p| p != &run.path);
        fs::remove_file(&run.path)
    }

    /// Records a run in the manifest under a role.
    pub fn describe(&self, run: &RunFile, role: &str, side: Side, iteration: u32) {
        let name = run.path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let side = match side {
            Side::Out => "out",
            Side::In => "in",
        };
        self.note(&format!("{name} {role} {side} {iteration} {}", run.records));
    }

    pub fn write_all<I: IntoIterator<Item = RunRecord>>(&self, name: &str, records: I) -> io::Result<RunFile> {
        let mut w = self.create(name)?;
        for rec in records {
            w.push(&rec)?;
        }
        w.finish()
    }

    pub fn read_all(&self, run: &RunFile) -> io::Result<Vec<RunRecord>> {
        let mut r = self.open_run(run)?;
        let mut out = Vec::with_capacity(run.records as usize);
        while let Some(rec) = r.next_record()? {
            out.push(rec);
        }
        Ok(out)
    }

    /// Buffers records and spills sorted runs, keeping the best record per
    /// key when `dedup` is set.
    pub fn sorter(&self, name: &str, dedup: bool) -> SpillSorter<'_> {
        SpillSorter {
            store: self,
            name: name.to_string(),
            dedup,
            buf: Vec::with_capacity(self.budget.buffer_records().min(1 << 16)),
            runs: Vec::new(),
        }
    }

    /// Merges sorted runs into one, several passes deep if there are more
    /// runs than the fan-in allows. Inputs are deleted.
    pub fn merge(&self, name: &str, mut runs: Vec<RunFile>, dedup: bool) -> io::Result<RunFile> {
        let fan_in = self.budget.merge_fan_in();
        loop {
            if runs.is_empty() {
                return self.write_all(name, std::iter::empty());
            }
            if runs.len() == 1 {
                return Ok(runs.pop().expect("one run"));
            }
            let mut next = Vec::new();
            for chunk in runs.chunks(fan_in) {
                next.push(self.merge_once(name, chunk, dedup)?);
            }
            for run in runs {
                self.remove(run)?;
            }
            runs = next;
        }
    }

    fn merge_once(&self, name: &str, runs: &[RunFile], dedup: bool) -> io::Result<RunFile> {
        let mut readers = runs.iter().map(|r| self.open_run(r)).collect::<io::Result<Vec<_>>>()?;
        let mut heap = BinaryHeap::new();
        for (i, r) in readers.iter_mut().enumerate() {
            if let Some(rec) = r.next_record()? {
                heap.push(Reverse((rec, i)));
            }
        }
        let mut out = self.create(name)?;
        let mut last: Option<(VertexId, VertexId)> = None;
        while let Some(Reverse((rec, i))) = heap.pop() {
            if !(dedup && last == Some(rec.key())) {
                out.push(&rec)?;
                last = Some(rec.key());
            }
            if let Some(next) = readers[i].next_record()? {
                heap.push(Reverse((next, i)));
            }
        }
        out.finish()
    }

    /// Deletes remaining runs, the manifest and the lock.
    pub fn close(self) {}
}

impl Drop for RunStore {
    fn drop(&mut self) {
        for p in self.files.borrow().iter() {
            let _ = fs::remove_file(p);
        }
        let _ = fs::remove_file(self.dir.join(MANIFEST_FILE));
        let _ = fs::remove_file(self.dir.join(LOCK_FILE));
    }
}

/// One outer-loop block: consecutive keys of a main run, each with its main
/// group and the group of a second run sharing the key.
#[derive(Default)]
pub struct Block {
    pub keys: Vec<VertexId>,
    main: Vec<RunRecord>,
    main_at: Vec<usize>,
    co: Vec<RunRecord>,
    co_at: Vec<usize>,
}

impl Block {
    pub fn main_of(&self, i: usize) -> &[RunRecord] {
        &self.main[self.main_range(i)]
    }

    /// Positions of key `i`'s main group within [`Block::main`].
    pub fn main_range(&self, i: usize) -> std::ops::Range<usize> {
        self.main_at[i]..self.main_at[i + 1]
    }

    pub fn co_of(&self, i: usize) -> &[RunRecord] {
        &self.co[self.co_at[i]..self.co_at[i + 1]]
    }

    /// Every main record of the block, in run order.
    pub fn main(&self) -> &[RunRecord] {
        &self.main
    }
}

/// Cuts a main run into blocks of at most `limit` bytes, counting main and
/// co-keyed records together. A key whose groups alone exceed the limit is
/// an error; co groups with no main group are skipped.
pub struct KeyedBlocks {
    main: RunReader,
    co: RunReader,
    limit: usize,
    block: Block,
    pending: (Vec<RunRecord>, Vec<RunRecord>),
}

impl KeyedBlocks {
    pub fn new(main: RunReader, co: RunReader, limit: usize) -> KeyedBlocks {
        KeyedBlocks { main, co, limit, block: Block::default(), pending: Default::default() }
    }

    pub fn next_block(&mut self) -> Result<Option<&Block>, ExtmemError> {
        let b = &mut self.block;
        b.keys.clear();
        b.main.clear();
        b.co.clear();
        b.main_at.clear();
        b.co_at.clear();
        b.main_at.push(0);
        b.co_at.push(0);
        loop {
            if self.pending.0.is_empty() {
                let Some(key) = self.main.next_group(&mut self.pending.0, self.limit)? else { break };
                self.co.skip_below(key)?;
                if self.co.peek()?.is_some_and(|c| c.owner == key) {
                    self.co.next_group(&mut self.pending.1, self.limit)?;
                }
                let bytes = (self.pending.0.len() + self.pending.1.len()) * RECORD_BYTES;
                if bytes > self.limit {
                    return Err(ExtmemError::GroupExceedsBudget { vertex: key, bytes, limit: self.limit });
                }
            }
            let key = self.pending.0[0].owner;
            let total = (b.main.len() + b.co.len() + self.pending.0.len() + self.pending.1.len()) * RECORD_BYTES;
            if !b.keys.is_empty() && total > self.limit {
                break;
            }
            b.keys.push(key);
            b.main.append(&mut self.pending.0);
            b.co.append(&mut self.pending.1);
            b.main_at.push(b.main.len());
            b.co_at.push(b.co.len());
        }
        Ok((!b.keys.is_empty()).then_some(&self.block))
    }
}

/// External sort with a bounded buffer.
pub struct SpillSorter<'a> {
    store: &'a RunStore,
    name: String,
    dedup: bool,
    buf: Vec<RunRecord>,
    runs: Vec<RunFile>,
}

impl SpillSorter<'_> {
    pub fn push(&mut self, rec: RunRecord) -> io::Result<()> {
        self.buf.push(rec);
        if self.buf.len() >= self.store.budget.buffer_records() {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> io::Result<()> {
        self.buf.sort_unstable();
        if self.dedup {
            self.buf.dedup_by_key(|r| r.key());
        }
        let run = self.store.write_all(&format!("{}-spill", self.name), self.buf.drain(..))?;
        self.runs.push(run);
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<RunFile> {
        if self.runs.is_empty() {
            self.buf.sort_unstable();
            if self.dedup {
                self.buf.dedup_by_key(|r| r.key());
            }
            return self.store.write_all(&self.name, self.buf.drain(..));
        }
        if !self.buf.is_empty() {
            self.spill()?;
        }
        let runs = std::mem::take(&mut self.runs);
        self.store.merge(&self.name, runs, self.dedup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(owner: u32, pivot: u32, dist: u32) -> RunRecord {
        RunRecord { owner, pivot, dist, hops: 1, side: Side::In }
    }

    #[test]
    fn record_round_trip() {
        let r = RunRecord { owner: 7, pivot: 1 << 30, dist: 99, hops: 65535, side: Side::In };
        assert_eq!(RunRecord::decode(&r.encode()).unwrap(), r);
        let mut bad = r.encode();
        bad[14] = 9;
        assert!(RunRecord::decode(&bad).is_err());
    }

    #[test]
    fn sorter_spills_and_dedups() {
        let dir = tempfile::tempdir().unwrap();
        let budget = MemoryBudget::new(16 * 4096, 4096).unwrap();
        let store = RunStore::open(dir.path(), budget).unwrap();
        assert!(matches!(RunStore::open(dir.path(), budget), Err(ExtmemError::Locked(_))));
        let mut s = store.sorter("t", true);
        let mut expect = std::collections::BTreeMap::new();
        for i in 0..20_000u32 {
            let (o, p, d) = (i * 7 % 101, i * 13 % 37, i % 50 + 1);
            s.push(rec(o, p, d)).unwrap();
            let e = expect.entry((o, p)).or_insert(d);
            *e = (*e).min(d);
        }
        let run = s.finish().unwrap();
        let got = store.read_all(&run).unwrap();
        let want: Vec<_> = expect.into_iter().map(|((o, p), d)| rec(o, p, d)).collect();
        assert_eq!(got, want);
        assert!(store.io().writes > 0 && store.io().reads > 0);
        drop(store);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn groups_respect_limit() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path(), MemoryBudget::new(8192, 4096).unwrap()).unwrap();
        let run = store.write_all("g", (0..5).map(|p| rec(3, p, 1)).chain([rec(4, 0, 1)])).unwrap();
        let mut r = store.open_run(&run).unwrap();
        let mut buf = Vec::new();
        assert_eq!(r.next_group(&mut buf, 1000).unwrap(), Some(3));
        assert_eq!(buf.len(), 5);
        buf.clear();
        assert_eq!(r.next_group(&mut buf, 1000).unwrap(), Some(4));
        assert_eq!(r.next_group(&mut buf, 1000).unwrap(), None);
        let mut r = store.open_run(&run).unwrap();
        match r.next_group(&mut Vec::new(), 2 * RECORD_BYTES) {
            Err(ExtmemError::GroupExceedsBudget { vertex: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}

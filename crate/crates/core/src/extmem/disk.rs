//! Binary index file.
//!
//! ```text
//! header   "HDIX" | version u16 | flags u16 | n u64 | out_count u64 | in_count u64
//! out      offsets u64 x (n + 1) | entries (pivot u32, dist u8 or u32) x out_count
//! in       same layout, directed graphs only
//! bp       optional: "BP01" | section length u64 | section body
//! ```
//!
//! All integers are little-endian. Flags: bit 0 directed, bit 1 weighted,
//! bit 2 one-byte distances, bit 3 bit-parallel section present.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bitparallel::{BpIndex, BpRoot, BpTuple};
use crate::graph::{Length, VertexId};
use crate::labeling::{IndexEntry, LabelIndex, LabelTable, Side};
use crate::query::{merge_join, DistanceIndex, QueryError, QueryResult};

pub const INDEX_MAGIC: [u8; 4] = *b"HDIX";
pub const INDEX_VERSION: u16 = 1;
const BP_MAGIC: [u8; 4] = *b"BP01";
const HEADER_BYTES: u64 = 32;
const TUPLE_BYTES: u64 = 21;

const FLAG_DIRECTED: u16 = 1;
const FLAG_WEIGHTED: u16 = 2;
const FLAG_DIST8: u16 = 4;
const FLAG_BP: u16 = 8;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index version {0}")]
    Version(u16),
    #[error("index file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error("distance {dist} at vertex {vertex} does not fit in one byte")]
    DistTooWide { vertex: VertexId, dist: Length },
}

/// Width of stored distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistWidth {
    U8,
    #[default]
    U32,
}

impl DistWidth {
    fn bytes(self) -> u64 {
        match self {
            DistWidth::U8 => 1,
            DistWidth::U32 => 4,
        }
    }

    fn entry_bytes(self) -> u64 {
        4 + self.bytes()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexHeader {
    pub directed: bool,
    pub weighted: bool,
    pub width: DistWidth,
    pub has_bp: bool,
    pub n: u64,
    pub out_count: u64,
    pub in_count: u64,
}

impl IndexHeader {
    fn encode(&self) -> [u8; HEADER_BYTES as usize] {
        let mut flags = 0;
        if self.directed {
            flags |= FLAG_DIRECTED;
        }
        if self.weighted {
            flags |= FLAG_WEIGHTED;
        }
        if self.width == DistWidth::U8 {
            flags |= FLAG_DIST8;
        }
        if self.has_bp {
            flags |= FLAG_BP;
        }
        let mut b = [0u8; HEADER_BYTES as usize];
        b[0..4].copy_from_slice(&INDEX_MAGIC);
        b[4..6].copy_from_slice(&INDEX_VERSION.to_le_bytes());
        b[6..8].copy_from_slice(&flags.to_le_bytes());
        b[8..16].copy_from_slice(&self.n.to_le_bytes());
        b[16..24].copy_from_slice(&self.out_count.to_le_bytes());
        b[24..32].copy_from_slice(&self.in_count.to_le_bytes());
        b
    }

    fn decode(b: &[u8; HEADER_BYTES as usize]) -> Result<IndexHeader, FormatError> {
        if b[0..4] != INDEX_MAGIC {
            return Err(FormatError::BadMagic);
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != INDEX_VERSION {
            return Err(FormatError::Version(version));
        }
        let flags = u16::from_le_bytes([b[6], b[7]]);
        if flags & !(FLAG_DIRECTED | FLAG_WEIGHTED | FLAG_DIST8 | FLAG_BP) != 0 {
            return Err(FormatError::Corrupt(format!("unknown flags {flags:#x}")));
        }
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().expect("8 bytes"));
        let h = IndexHeader {
            directed: flags & FLAG_DIRECTED != 0,
            weighted: flags & FLAG_WEIGHTED != 0,
            width: if flags & FLAG_DIST8 != 0 { DistWidth::U8 } else { DistWidth::U32 },
            has_bp: flags & FLAG_BP != 0,
            n: u64_at(8),
            out_count: u64_at(16),
            in_count: u64_at(24),
        };
        if !h.directed && h.in_count != 0 {
            return Err(FormatError::Corrupt("undirected index with an in side".into()));
        }
        if h.n > u32::MAX as u64 {
            return Err(FormatError::Corrupt(format!("{} vertices", h.n)));
        }
        Ok(h)
    }

    fn side_bytes(&self, count: u64) -> u64 {
        (self.n + 1) * 8 + count * self.width.entry_bytes()
    }

    /// Bytes before the optional bit-parallel section.
    fn labels_end(&self) -> u64 {
        let inn = if self.directed { self.side_bytes(self.in_count) } else { 0 };
        HEADER_BYTES + self.side_bytes(self.out_count) + inn
    }
}

/// Labels of one side, streamed in (owner, pivot) order.
pub(crate) struct SideSource<'a> {
    pub offsets: Vec<u64>,
    pub entries: Box<dyn Iterator<Item = io::Result<(VertexId, IndexEntry)>> + 'a>,
}

fn write_entry<W: Write>(w: &mut W, owner: VertexId, e: IndexEntry, width: DistWidth) -> Result<(), FormatError> {
    w.write_all(&e.pivot.to_le_bytes())?;
    match width {
        DistWidth::U32 => w.write_all(&e.dist.to_le_bytes())?,
        DistWidth::U8 => {
            let d = u8::try_from(e.dist).map_err(|_| FormatError::DistTooWide { vertex: owner, dist: e.dist })?;
            w.write_all(&[d])?;
        }
    }
    Ok(())
}

fn write_u64s<W: Write>(w: &mut W, xs: &[u64]) -> io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn write_side<W: Write>(w: &mut W, src: SideSource<'_>, width: DistWidth) -> Result<(), FormatError> {
    write_u64s(w, &src.offsets)?;
    let mut count = 0u64;
    for item in src.entries {
        let (owner, e) = item?;
        write_entry(w, owner, e, width)?;
        count += 1;
    }
    if Some(&count) != src.offsets.last() {
        return Err(FormatError::Corrupt(format!("side has {count} entries, offsets say {:?}", src.offsets.last())));
    }
    Ok(())
}

fn bp_section_len(bp: &BpIndex, width: DistWidth) -> u64 {
    let n = bp.num_vertices() as u64;
    let roots: u64 = bp.roots().iter().map(|r| 5 + 4 * r.neighbors.len() as u64).sum();
    4 + roots
        + 8 * n
        + 8 * (n + 1)
        + TUPLE_BYTES * bp.total_tuples() as u64
        + 8 * (n + 1)
        + width.entry_bytes() * bp.normal().len() as u64
}

fn write_bp<W: Write>(w: &mut W, bp: &BpIndex, width: DistWidth) -> Result<(), FormatError> {
    w.write_all(&BP_MAGIC)?;
    w.write_all(&bp_section_len(bp, width).to_le_bytes())?;
    w.write_all(&(bp.roots().len() as u32).to_le_bytes())?;
    for r in bp.roots() {
        w.write_all(&r.vertex.to_le_bytes())?;
        w.write_all(&[r.neighbors.len() as u8])?;
        for v in &r.neighbors {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    write_u64s(w, bp.markers())?;
    write_u64s(w, bp.tuple_offsets())?;
    for t in bp.tuples() {
        w.write_all(&[t.root])?;
        w.write_all(&t.dist.to_le_bytes())?;
        w.write_all(&t.s_minus.to_le_bytes())?;
        w.write_all(&t.s_zero.to_le_bytes())?;
    }
    write_side(w, table_source(bp.normal()), width)
}

fn table_source(t: &LabelTable) -> SideSource<'_> {
    let entries =
        (0..t.num_vertices()).flat_map(move |v| t.label(v as VertexId).iter().map(move |&e| Ok((v as VertexId, e))));
    SideSource { offsets: t.offsets().to_vec(), entries: Box::new(entries) }
}

/// Writes to a temporary sibling and renames into place, so a failed write
/// leaves no partial index behind.
pub(crate) fn write_index_file(
    path: &Path,
    mut header: IndexHeader,
    out: SideSource<'_>,
    inn: Option<SideSource<'_>>,
    bp: Option<&BpIndex>,
) -> Result<(), FormatError> {
    header.has_bp = bp.is_some();
    header.out_count = *out.offsets.last().unwrap_or(&0);
    header.in_count = inn.as_ref().map_or(0, |s| *s.offsets.last().unwrap_or(&0));
    let tmp = tmp_path(path);
    let res = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&header.encode())?;
        write_side(&mut w, out, header.width)?;
        if let Some(inn) = inn {
            write_side(&mut w, inn, header.width)?;
        }
        if let Some(bp) = bp {
            write_bp(&mut w, bp, header.width)?;
        }
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Saves an in-memory index, optionally with its bit-parallel form.
pub fn write_label_index(
    idx: &LabelIndex,
    bp: Option<&BpIndex>,
    width: DistWidth,
    path: &Path,
) -> Result<(), FormatError> {
    let header = IndexHeader {
        directed: idx.is_directed(),
        weighted: idx.is_weighted(),
        width,
        has_bp: false,
        n: idx.num_vertices() as u64,
        out_count: 0,
        in_count: 0,
    };
    write_index_file(path, header, table_source(idx.out_table()), idx.in_table().map(table_source), bp)
}

/// An index file opened for positional reads. Offsets are held in memory,
/// entries are read on demand.
#[derive(Debug)]
pub struct DiskIndex {
    file: File,
    path: PathBuf,
    header: IndexHeader,
    out_offsets: Vec<u64>,
    in_offsets: Vec<u64>,
    out_base: u64,
    in_base: u64,
    bp_at: Option<u64>,
}

fn read_u64s(file: &File, at: u64, count: u64) -> io::Result<Vec<u64>> {
    let mut buf = vec![0u8; (count * 8) as usize];
    file.read_exact_at(&mut buf, at)?;
    Ok(buf.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

fn check_offsets(offsets: &[u64], count: u64, what: &str) -> Result<(), FormatError> {
    if offsets.first() != Some(&0) || offsets.last() != Some(&count) || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(FormatError::Corrupt(format!("{what} offsets are not a valid prefix sum")));
    }
    Ok(())
}

impl DiskIndex {
    pub fn open(path: &Path) -> Result<DiskIndex, FormatError> {
        let file = File::open(path)?;
        let actual = file.metadata()?.len();
        let truncated = |expected: u64| FormatError::Truncated { expected, actual };
        if actual < HEADER_BYTES {
            return Err(truncated(HEADER_BYTES));
        }
        let mut hb = [0u8; HEADER_BYTES as usize];
        file.read_exact_at(&mut hb, 0)?;
        let header = IndexHeader::decode(&hb)?;
        let mut expected = header.labels_end();
        let bp_at = header.has_bp.then_some(expected);
        if let Some(at) = bp_at {
            if actual < at + 12 {
                return Err(truncated(at + 12));
            }
            let mut b = [0u8; 12];
            file.read_exact_at(&mut b, at)?;
            if b[0..4] != BP_MAGIC {
                return Err(FormatError::Corrupt("missing bit-parallel section".into()));
            }
            expected = at + 12 + u64::from_le_bytes(b[4..12].try_into().expect("8 bytes"));
        }
        if actual < expected {
            return Err(truncated(expected));
        }
        if actual > expected {
            return Err(FormatError::Corrupt(format!("{} trailing bytes", actual - expected)));
        }
        let n = header.n;
        let out_offsets = read_u64s(&file, HEADER_BYTES, n + 1)?;
        check_offsets(&out_offsets, header.out_count, "out")?;
        let out_base = HEADER_BYTES + (n + 1) * 8;
        let (in_offsets, in_base) = if header.directed {
            let at = HEADER_BYTES + header.side_bytes(header.out_count);
            let offs = read_u64s(&file, at, n + 1)?;
            check_offsets(&offs, header.in_count, "in")?;
            (offs, at + (n + 1) * 8)
        } else {
            (Vec::new(), out_base)
        };
        Ok(DiskIndex { file, path: path.to_path_buf(), header, out_offsets, in_offsets, out_base, in_base, bp_at })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn header(&self) -> &IndexHeader {
        &self.header
    }

    pub fn is_directed(&self) -> bool {
        self.header.directed
    }

    pub fn has_bp(&self) -> bool {
        self.header.has_bp
    }

    pub fn total_entries(&self) -> u64 {
        self.header.out_count + self.header.in_count
    }

    fn offsets(&self, side: Side) -> (&[u64], u64) {
        match side {
            Side::In if self.header.directed => (&self.in_offsets, self.in_base),
            _ => (&self.out_offsets, self.out_base),
        }
    }

    /// Reads `L_side(v)` into `buf`, replacing its contents.
    pub fn read_label(&self, side: Side, v: VertexId, buf: &mut Vec<IndexEntry>) -> io::Result<()> {
        let (offsets, base) = self.offsets(side);
        let (lo, hi) = (offsets[v as usize], offsets[v as usize + 1]);
        read_entries(&self.file, base, lo, hi, self.header.width, buf)
    }

    pub fn label(&self, side: Side, v: VertexId) -> io::Result<Vec<IndexEntry>> {
        let mut buf = Vec::new();
        self.read_label(side, v, &mut buf)?;
        Ok(buf)
    }

    /// How often each vertex appears as a non-trivial pivot, read one label
    /// at a time.
    pub fn pivot_counts(&self) -> io::Result<Vec<u64>> {
        let n = self.header.n as usize;
        let mut counts = vec![0u64; n];
        let mut buf = Vec::new();
        let sides: &[Side] = if self.header.directed { &[Side::Out, Side::In] } else { &[Side::Out] };
        for &side in sides {
            for v in 0..n as VertexId {
                self.read_label(side, v, &mut buf)?;
                for e in buf.iter().filter(|e| e.pivot != v) {
                    counts[e.pivot as usize] += 1;
                }
            }
        }
        Ok(counts)
    }

    /// Per-vertex label sizes over the stored sides.
    pub fn label_sizes(&self) -> Vec<u64> {
        let n = self.header.n as usize;
        (0..n)
            .map(|v| {
                let out = self.out_offsets[v + 1] - self.out_offsets[v];
                let inn = if self.header.directed { self.in_offsets[v + 1] - self.in_offsets[v] } else { 0 };
                out + inn
            })
            .collect()
    }

    /// Loads every label into memory.
    pub fn to_label_index(&self) -> Result<LabelIndex, FormatError> {
        let load = |side: Side| -> Result<LabelTable, FormatError> {
            let (offsets, base) = self.offsets(side);
            let mut entries = Vec::new();
            read_entries(&self.file, base, 0, *offsets.last().unwrap_or(&0), self.header.width, &mut entries)?;
            LabelTable::from_parts(offsets.to_vec(), entries).ok_or_else(|| FormatError::Corrupt("label table".into()))
        };
        let out = load(Side::Out)?;
        let inn = if self.header.directed { Some(load(Side::In)?) } else { None };
        Ok(LabelIndex::new(self.header.directed, self.header.weighted, out, inn))
    }

    /// Loads the bit-parallel section, if the file has one.
    pub fn load_bp(&self) -> Result<Option<BpIndex>, FormatError> {
        let Some(start) = self.bp_at else { return Ok(None) };
        let corrupt = |what: &str| FormatError::Corrupt(format!("bit-parallel section: {what}"));
        let f = &self.file;
        let n = self.header.n;
        let mut at = start + 12;
        let mut b4 = [0u8; 4];
        f.read_exact_at(&mut b4, at)?;
        at += 4;
        let num_roots = u32::from_le_bytes(b4) as usize;
        if num_roots > crate::bitparallel::MAX_ROOTS {
            return Err(corrupt("too many roots"));
        }
        let mut roots = Vec::with_capacity(num_roots);
        for _ in 0..num_roots {
            let mut h = [0u8; 5];
            f.read_exact_at(&mut h, at)?;
            at += 5;
            let k = h[4] as u64;
            let mut nb = vec![0u8; (4 * k) as usize];
            f.read_exact_at(&mut nb, at)?;
            at += 4 * k;
            let neighbors = nb.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
            roots.push(BpRoot { vertex: u32::from_le_bytes(h[0..4].try_into().expect("4 bytes")), neighbors });
        }
        let marker = read_u64s(f, at, n)?;
        at += 8 * n;
        let tuple_offsets = read_u64s(f, at, n + 1)?;
        at += 8 * (n + 1);
        let count = *tuple_offsets.last().unwrap_or(&0);
        let mut raw = vec![0u8; (count * TUPLE_BYTES) as usize];
        f.read_exact_at(&mut raw, at)?;
        at += count * TUPLE_BYTES;
        let tuples = raw
            .chunks_exact(TUPLE_BYTES as usize)
            .map(|c| BpTuple {
                root: c[0],
                dist: u32::from_le_bytes(c[1..5].try_into().expect("4 bytes")),
                s_minus: u64::from_le_bytes(c[5..13].try_into().expect("8 bytes")),
                s_zero: u64::from_le_bytes(c[13..21].try_into().expect("8 bytes")),
            })
            .collect();
        let offsets = read_u64s(f, at, n + 1)?;
        at += 8 * (n + 1);
        let total = *offsets.last().unwrap_or(&0);
        let mut entries = Vec::new();
        read_entries(f, at, 0, total, self.header.width, &mut entries)?;
        let normal = LabelTable::from_parts(offsets, entries).ok_or_else(|| corrupt("normal labels"))?;
        BpIndex::from_parts(roots, marker, tuple_offsets, tuples, normal).map(Some).ok_or_else(|| corrupt("layout"))
    }

    /// Byte offset of the bit-parallel section.
    pub fn bp_section_offset(&self) -> Option<u64> {
        self.bp_at
    }
}

fn read_entries(
    file: &File,
    base: u64,
    lo: u64,
    hi: u64,
    width: DistWidth,
    buf: &mut Vec<IndexEntry>,
) -> io::Result<()> {
    buf.clear();
    if hi <= lo {
        return Ok(());
    }
    let esz = width.entry_bytes();
    let mut raw = vec![0u8; ((hi - lo) * esz) as usize];
    file.read_exact_at(&mut raw, base + lo * esz)?;
    buf.extend(raw.chunks_exact(esz as usize).map(|c| IndexEntry {
        pivot: u32::from_le_bytes(c[0..4].try_into().expect("4 bytes")),
        dist: match width {
            DistWidth::U8 => c[4] as Length,
            DistWidth::U32 => u32::from_le_bytes(c[4..8].try_into().expect("4 bytes")),
        },
    }));
    Ok(())
}

impl DistanceIndex for DiskIndex {
    fn num_vertices(&self) -> usize {
        self.header.n as usize
    }

    fn query(&self, s: VertexId, t: VertexId) -> Result<QueryResult, QueryError> {
        self.check(s)?;
        self.check(t)?;
        let out = self.label(Side::Out, s)?;
        let inn = self.label(Side::In, t)?;
        Ok(merge_join(&out, &inn))
    }
}

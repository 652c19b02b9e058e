use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use super::{Graph, GraphError, Length, VertexId};

const GRAPH_MAGIC: &[u8; 4] = b"HDGR";
const GRAPH_VERSION: u16 = 1;
const FLAG_DIRECTED: u16 = 1;
const FLAG_WEIGHTED: u16 = 2;

/// Mapping between compacted vertex ids and the ids used in the input file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    original: Vec<u64>,
    internal: HashMap<u64, VertexId>,
}

impl IdMap {
    pub fn identity(n: usize) -> IdMap {
        IdMap::from_original((0..n as u64).collect())
    }

    pub fn from_original(original: Vec<u64>) -> IdMap {
        let internal = original.iter().enumerate().map(|(i, &id)| (id, i as VertexId)).collect();
        IdMap { original, internal }
    }

    fn intern(&mut self, id: u64) -> VertexId {
        let next = self.original.len() as VertexId;
        *self.internal.entry(id).or_insert_with(|| {
            self.original.push(id);
            next
        })
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn original(&self, v: VertexId) -> u64 {
        self.original[v as usize]
    }

    pub fn internal(&self, id: u64) -> Option<VertexId> {
        self.internal.get(&id).copied()
    }

    pub fn originals(&self) -> &[u64] {
        &self.original
    }
}

#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: IdMap,
}

/// Parses a whitespace-separated `u v [w]` edge list. Lines starting with `#`
/// and blank lines are skipped. Vertex ids are compacted in order of first
/// appearance. When `weighted` is false a third column is ignored.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool, weighted: bool) -> Result<LoadedGraph, GraphError> {
    let mut ids = IdMap::default();
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(GraphError::Parse {
                line: lineno,
                message: format!("expected \"u v [w]\", found {} fields", fields.len()),
            });
        }
        let parse_id = |s: &str| {
            s.parse::<u64>()
                .map_err(|e| GraphError::Parse { line: lineno, message: format!("bad vertex id {s:?}: {e}") })
        };
        let u = parse_id(fields[0])?;
        let v = parse_id(fields[1])?;
        let w = match (weighted, fields.get(2)) {
            (true, Some(s)) => {
                let w: i64 = s
                    .parse()
                    .map_err(|e| GraphError::Parse { line: lineno, message: format!("bad edge length {s:?}: {e}") })?;
                if w <= 0 || w > u32::MAX as i64 {
                    return Err(GraphError::Validation(format!("line {lineno}: edge length {w} must be in [1, 2^32)")));
                }
                w as Length
            }
            _ => 1,
        };
        let (u, v) = (ids.intern(u), ids.intern(v));
        edges.push((u, v, w));
    }
    let graph = Graph::from_edges(ids.len(), directed, weighted, edges)?;
    Ok(LoadedGraph { graph, ids })
}

/// Writes the graph as an edge list, translating ids through `ids` if given.
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W, ids: Option<&IdMap>) -> std::io::Result<()> {
    let name = |v: VertexId| ids.map_or(v as u64, |m| m.original(v));
    for (u, v, len) in g.edges() {
        if g.is_weighted() {
            writeln!(w, "{} {} {}", name(u), name(v), len)?;
        } else {
            writeln!(w, "{} {}", name(u), name(v))?;
        }
    }
    w.flush()
}

/// Binary cache layout, little-endian: magic, version u16, flags u16, n u64,
/// m u64, CSR offsets (u64 x (n+1)), targets (u32 x arcs), lengths (u32 x arcs).
pub fn write_binary<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    let (offsets, targets, lengths) = g.csr_parts();
    let mut flags = 0u16;
    if g.is_directed() {
        flags |= FLAG_DIRECTED;
    }
    if g.is_weighted() {
        flags |= FLAG_WEIGHTED;
    }
    w.write_all(GRAPH_MAGIC)?;
    w.write_all(&GRAPH_VERSION.to_le_bytes())?;
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&(g.num_vertices() as u64).to_le_bytes())?;
    w.write_all(&(g.num_edges() as u64).to_le_bytes())?;
    for &o in offsets {
        w.write_all(&(o as u64).to_le_bytes())?;
    }
    for &t in targets {
        w.write_all(&t.to_le_bytes())?;
    }
    for &l in lengths {
        w.write_all(&l.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Graph, GraphError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != GRAPH_MAGIC {
        return Err(GraphError::Format("bad magic".into()));
    }
    let version = read_u16(&mut r)?;
    if version != GRAPH_VERSION {
        return Err(GraphError::Format(format!("unsupported version {version}")));
    }
    let flags = read_u16(&mut r)?;
    let n = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut r)? as usize);
    }
    let arcs = *offsets.last().unwrap_or(&0);
    if offsets.windows(2).any(|w| w[0] > w[1]) || offsets.first().is_some_and(|&o| o != 0) {
        return Err(GraphError::Format("offsets are not monotone".into()));
    }
    let mut targets = Vec::with_capacity(arcs);
    for _ in 0..arcs {
        targets.push(read_u32(&mut r)?);
    }
    let mut edges = Vec::with_capacity(arcs);
    for u in 0..n {
        for &t in &targets[offsets[u]..offsets[u + 1]] {
            edges.push((u as VertexId, t, read_u32(&mut r)?));
        }
    }
    let directed = flags & FLAG_DIRECTED != 0;
    let g = Graph::from_edges(n, directed, flags & FLAG_WEIGHTED != 0, edges)?;
    if g.num_edges() != m {
        return Err(GraphError::Format(format!("header declares {m} edges, body has {}", g.num_edges())));
    }
    Ok(g)
}

fn read_u16<R: Read>(r: &mut R) -> std::io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

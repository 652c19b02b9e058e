use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use hopdb::extmem::DiskIndex;
use hopdb::graph::IdMap;
use hopdb::query::{query_chunk, DistanceIndex, QueryResult};
use hopdb::VertexId;

use crate::args::QueryArgs;
use crate::build::{open_input, sidecar};
use crate::fail::Fail;

/// Original ids from the `.ids` sidecar, or the identity when there is none.
pub fn load_ids(index: &Path, n: usize) -> Result<IdMap, Fail> {
    let path = sidecar(index, ".ids");
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(IdMap::identity(n)),
        Err(e) => return Err(Fail::from(e).context(path.display())),
    };
    let mut ids = Vec::with_capacity(n);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let id =
            line.trim().parse::<u64>().map_err(|_| Fail::Io(format!("{}: line {}: bad id", path.display(), i + 1)))?;
        ids.push(id);
    }
    if ids.len() != n {
        return Err(Fail::Io(format!("{}: {} ids for {n} vertices", path.display(), ids.len())));
    }
    Ok(IdMap::from_original(ids))
}

pub fn open_index(path: &Path, in_memory: bool, use_bp: bool) -> Result<Box<dyn DistanceIndex>, Fail> {
    let at = |e: hopdb::extmem::FormatError| Fail::from(e).context(path.display());
    let disk = DiskIndex::open(path).map_err(at)?;
    if use_bp {
        if let Some(bp) = disk.load_bp().map_err(at)? {
            return Ok(Box::new(bp));
        }
    }
    if in_memory {
        Ok(Box::new(disk.to_label_index().map_err(at)?))
    } else {
        Ok(Box::new(disk))
    }
}

fn internal(ids: &IdMap, id: u64) -> Result<VertexId, String> {
    ids.internal(id).ok_or_else(|| format!("vertex {id} is not in the index"))
}

fn emit(w: &mut impl Write, s: u64, t: u64, res: &QueryResult) -> io::Result<()> {
    writeln!(w, "{s} {t} {}", res.display_distance())
}

pub fn cmd_query(a: &QueryArgs, threads: Option<usize>) -> Result<(), Fail> {
    let idx = open_index(&a.index, a.in_memory, !a.no_bp)?;
    let ids = load_ids(&a.index, idx.num_vertices())?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());

    if let Some(pair) = &a.pair {
        let (s, t) = (pair[0], pair[1]);
        let res =
            idx.query(internal(&ids, s).map_err(Fail::Validation)?, internal(&ids, t).map_err(Fail::Validation)?)?;
        emit(&mut out, s, t, &res)?;
        out.flush()?;
        return Ok(());
    }
    let Some(batch) = &a.batch else {
        return Err(Fail::Validation("give --pair S T or --batch FILE".into()));
    };

    let parallel = threads != Some(1);
    let chunk = a.chunk.max(1);
    let input = open_input(batch)?;
    let mut originals: Vec<(u64, u64)> = Vec::with_capacity(chunk);
    let mut pairs: Vec<(VertexId, VertexId)> = Vec::with_capacity(chunk);
    let mut answered = 0u64;
    let start = Instant::now();

    let mut flush = |originals: &mut Vec<(u64, u64)>, pairs: &mut Vec<(VertexId, VertexId)>, out: &mut BufWriter<_>| {
        for (res, &(s, t)) in query_chunk(idx.as_ref(), pairs, parallel).into_iter().zip(originals.iter()) {
            emit(out, s, t, &res?)?;
        }
        answered += pairs.len() as u64;
        originals.clear();
        pairs.clear();
        Ok::<(), Fail>(())
    };

    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = |m: String| Fail::Validation(format!("{}: line {}: {m}", batch.display(), i + 1));
        let mut cols = t.split_whitespace().map(str::parse::<u64>);
        let (Some(Ok(s)), Some(Ok(d)), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(bad(format!("expected `s t`, got {t:?}")));
        };
        pairs.push((internal(&ids, s).map_err(bad)?, internal(&ids, d).map_err(bad)?));
        originals.push((s, d));
        if pairs.len() == chunk {
            flush(&mut originals, &mut pairs, &mut out)?;
        }
    }
    flush(&mut originals, &mut pairs, &mut out)?;
    out.flush()?;
    if a.timing {
        let secs = start.elapsed().as_secs_f64();
        eprintln!(
            "{answered} queries in {secs:.3}s ({:.0} per second, {:.2} us each)",
            if secs > 0.0 { answered as f64 / secs } else { 0.0 },
            if answered > 0 { secs * 1e6 / answered as f64 } else { 0.0 }
        );
    }
    Ok(())
}

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use hopdb::bitparallel::bp_transform;
use hopdb::extmem::{extmem_build, write_label_index, DiskIndex, ExtmemOptions, MemoryBudget};
use hopdb::graph::{load_edge_list, rank_by_degree, read_binary, write_ranking, IdMap};
use hopdb::report::BuildReport;
use hopdb::{build_index, Graph, RankAssignment, VertexId};

use crate::args::{BuildArgs, GraphArgs, InputFormat, LabelArgs, Size};
use crate::fail::Fail;

/// `path` with `suffix` appended to the file name.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(path.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>, Fail> {
    if path.as_os_str() == "-" {
        Ok(Box::new(BufReader::new(io::stdin().lock())))
    } else {
        let f = File::open(path).map_err(|e| Fail::from(e).context(path.display()))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

pub fn load_graph(path: &Path, directed: bool, weighted: bool, format: InputFormat) -> Result<(Graph, IdMap), Fail> {
    let input = open_input(path)?;
    let ctx = |e: hopdb::GraphError| Fail::from(e).context(path.display());
    match format {
        InputFormat::Text => {
            let loaded = load_edge_list(input, directed, weighted).map_err(ctx)?;
            Ok((loaded.graph, loaded.ids))
        }
        InputFormat::Binary => {
            let g = read_binary(input).map_err(ctx)?;
            if g.is_directed() != directed || g.is_weighted() != weighted {
                return Err(Fail::Validation(format!(
                    "{}: file holds a {} {} graph",
                    path.display(),
                    if g.is_directed() { "directed" } else { "undirected" },
                    if g.is_weighted() { "weighted" } else { "unweighted" },
                )));
            }
            let n = g.num_vertices();
            Ok((g, IdMap::identity(n)))
        }
    }
}

pub fn load_input(a: &GraphArgs) -> Result<(Graph, IdMap), Fail> {
    load_graph(&a.graph, a.directed, a.weighted, a.input_format)
}

/// Ranking from the ranking file (original ids) or the chosen strategy.
pub fn ranking(g: &Graph, ids: &IdMap, a: &LabelArgs) -> Result<RankAssignment, Fail> {
    let Some(path) = &a.rank_file else {
        return Ok(rank_by_degree(g, a.rank.into()));
    };
    let input = open_input(path)?;
    let mut order: Vec<VertexId> = Vec::with_capacity(g.num_vertices());
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = |m: String| Fail::Validation(format!("{}: line {}: {m}", path.display(), i + 1));
        let id: u64 = t.parse().map_err(|_| bad(format!("bad vertex id {t:?}")))?;
        order.push(ids.internal(id).ok_or_else(|| bad(format!("vertex {id} is not in the graph")))?);
    }
    if order.len() != g.num_vertices() {
        return Err(Fail::Validation(format!(
            "{}: ranking lists {} vertices, graph has {}",
            path.display(),
            order.len(),
            g.num_vertices()
        )));
    }
    RankAssignment::from_order(order).map_err(|e| Fail::from(e).context(path.display()))
}

/// Scratch directory for one external build, below `base` or the system
/// temporary directory.
pub fn scratch_dir(base: Option<&Path>) -> PathBuf {
    let base = base.map(Path::to_path_buf).unwrap_or_else(std::env::temp_dir);
    base.join(format!("hopdb-{}", std::process::id()))
}

pub fn write_sidecars(index: &Path, ids: &IdMap, r: &RankAssignment) -> Result<(), Fail> {
    let write = |suffix: &str, body: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> Result<(), Fail> {
        let path = sidecar(index, suffix);
        let ctx = |e: io::Error| Fail::from(e).context(path.display());
        let mut w = BufWriter::new(File::create(&path).map_err(ctx)?);
        body(&mut w).and_then(|_| w.flush()).map_err(ctx)
    };
    write(".ids", &|w| ids.originals().iter().try_for_each(|id| writeln!(w, "{id}")))?;
    write(".rank", &|w| write_ranking(r, w))
}

pub fn cmd_build(a: &BuildArgs) -> Result<(), Fail> {
    let start = Instant::now();
    if a.bp && (a.input.directed || a.input.weighted) {
        return Err(Fail::Validation("--bp needs an undirected unweighted graph".into()));
    }
    let (g, ids) = load_input(&a.input)?;
    let r = ranking(&g, &ids, &a.label)?;
    let cfg = a.label.config(!a.no_stats);
    let width = a.dist_width.into();
    let out = &a.output;
    let at_out = |f: Fail| f.context(out.display());

    let mut report = match a.memory {
        Size::Unlimited => {
            let built = build_index(&g, &r, &cfg)?;
            let bp = if a.bp { Some(bp_transform(&built.index, &g, &r, a.bp_roots)?) } else { None };
            write_label_index(&built.index, bp.as_ref(), width, out).map_err(|e| at_out(e.into()))?;
            BuildReport::new(&g, &r, &built.index, built.stats)
        }
        Size::Bytes(m) => {
            let budget = MemoryBudget::new(m, a.block)?;
            let workdir = scratch_dir(a.workdir.as_deref());
            let opts = ExtmemOptions { budget, workdir: workdir.clone(), width };
            let built = extmem_build(&g, &r, &cfg, &opts, out);
            let _ = fs::remove_dir(&workdir);
            let built = built.map_err(|e| at_out(e.into()))?;
            if a.bp {
                let idx = DiskIndex::open(out)?.to_label_index()?;
                let bp = bp_transform(&idx, &g, &r, a.bp_roots)?;
                write_label_index(&idx, Some(&bp), width, out).map_err(|e| at_out(e.into()))?;
            }
            let disk = DiskIndex::open(out)?;
            let mut report = BuildReport::from_disk(&g, &r, &disk, built.stats)?;
            report.io = built.io;
            report
        }
    };
    report.index_bytes = fs::metadata(out)?.len();
    write_sidecars(out, &ids, &r)?;
    report.wall_clock = start.elapsed();

    if !a.no_stats {
        let dir = a.report_dir.clone().unwrap_or_else(|| sidecar(out, ".report"));
        fs::create_dir_all(&dir).map_err(|e| Fail::from(e).context(dir.display()))?;
        for (name, body) in report.csv_files() {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Fail::from(e).context(path.display()))?;
        }
    }
    if !a.quiet {
        eprint!("{}", report.human());
    }
    Ok(())
}

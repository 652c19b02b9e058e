use std::fs;

use rayon::prelude::*;

use hopdb::bitparallel::bp_transform;
use hopdb::extmem::{extmem_build, DiskIndex, ExtmemOptions, MemoryBudget};
use hopdb::graph::{generate_glp, GlpParams, IdMap};
use hopdb::oracle::{all_pairs, DistanceMatrix};
use hopdb::query::{DisplayDistance, DistanceIndex};
use hopdb::{build_index, Graph, Length, VertexId};

use crate::args::{Size, VerifyArgs};
use crate::build::{load_graph, ranking, scratch_dir};
use crate::fail::Fail;

struct Mismatch {
    s: VertexId,
    t: VertexId,
    got: Result<Length, String>,
    expected: Length,
}

fn first_mismatch(idx: &dyn DistanceIndex, truth: &DistanceMatrix) -> Option<Mismatch> {
    let n = truth.num_vertices() as VertexId;
    (0..n).into_par_iter().find_map_first(|s| {
        (0..n).find_map(|t| {
            let expected = truth.get(s, t);
            match idx.query(s, t) {
                Ok(res) if res.distance == expected => None,
                Ok(res) => Some(Mismatch { s, t, got: Ok(res.distance), expected }),
                Err(e) => Some(Mismatch { s, t, got: Err(e.to_string()), expected }),
            }
        })
    })
}

fn check(name: &str, what: &str, idx: &dyn DistanceIndex, truth: &DistanceMatrix, ids: &IdMap) -> Result<u64, Fail> {
    match first_mismatch(idx, truth) {
        None => Ok(truth.num_vertices() as u64 * truth.num_vertices() as u64),
        Some(m) => {
            let got = match m.got {
                Ok(d) => DisplayDistance(d).to_string(),
                Err(e) => format!("error ({e})"),
            };
            Err(Fail::Verification(format!(
                "{name}: {what} distance({}, {}) = {got}, expected {}",
                ids.original(m.s),
                ids.original(m.t),
                DisplayDistance(m.expected)
            )))
        }
    }
}

fn verify_graph(a: &VerifyArgs, name: &str, g: &Graph, ids: &IdMap) -> Result<u64, Fail> {
    if g.num_vertices() > a.max_vertices {
        return Err(Fail::Validation(format!(
            "{name}: {} vertices is above the oracle limit of {} (see --max-vertices)",
            g.num_vertices(),
            a.max_vertices
        )));
    }
    let r = ranking(g, ids, &a.label)?;
    let cfg = a.label.config(false);
    let truth = all_pairs(g);
    let idx = match a.memory {
        Size::Unlimited => build_index(g, &r, &cfg)?.index,
        Size::Bytes(m) => {
            let budget = MemoryBudget::new(m, a.block)?;
            let workdir = scratch_dir(a.workdir.as_deref());
            let out = workdir.with_extension("hdx");
            let opts = ExtmemOptions { budget, workdir: workdir.clone(), width: Default::default() };
            let built = extmem_build(g, &r, &cfg, &opts, &out);
            let _ = fs::remove_dir(&workdir);
            built?;
            let disk = DiskIndex::open(&out);
            let checked = disk.map_err(Fail::from).and_then(|d| {
                check(name, "disk index", &d, &truth, ids)?;
                Ok(d.to_label_index()?)
            });
            let _ = fs::remove_file(&out);
            checked?
        }
    };
    let mut pairs = check(name, "index", &idx, &truth, ids)?;
    if let Some(roots) = a.bp_roots {
        let bp = bp_transform(&idx, g, &r, roots)?;
        pairs += check(name, "bit-parallel index", &bp, &truth, ids)?;
    }
    Ok(pairs)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), Fail> {
    let mut pairs = 0u64;
    let graphs;
    if let Some(count) = a.glp {
        if a.max_n < 2 {
            return Err(Fail::Validation("--max-n must be at least 2".into()));
        }
        let low = 2.min(a.max_n).max(a.max_n / 10);
        for i in 0..count {
            let n = low + (i * 37) % (a.max_n - low + 1);
            let density = 1.0 + (i % 9) as f64 * 0.5;
            let seed = a.seed.wrapping_add(i as u64);
            let g = generate_glp(n, &GlpParams::with_density(density), seed)?;
            let ids = IdMap::identity(n);
            pairs += verify_graph(a, &format!("glp n={n} density={density} seed={seed}"), &g, &ids)?;
        }
        graphs = count;
    } else {
        let path = a.graph.as_ref().expect("clap requires a graph without --glp");
        let (g, ids) = load_graph(path, a.directed, a.weighted, a.input_format)?;
        pairs += verify_graph(a, &path.display().to_string(), &g, &ids)?;
        graphs = 1;
    }
    println!("ok: {graphs} graph(s), {pairs} pairs match");
    Ok(())
}

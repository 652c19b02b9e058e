//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use common::{glp_graph, lemmas, random_graph, Class, CLASSES};
use hopdb::bitparallel::bp_transform;
use hopdb::extmem::{extmem_build, write_label_index, DistWidth, ExtmemOptions, MemoryBudget};
use hopdb::graph::{generate_glp, generate_named, rank_by_degree, GlpParams, NamedShape, RankStrategy};
use hopdb::labeling::{coverage_by_top, LabelIndex};
use hopdb::oracle::{all_pairs, hop_diameter};
use hopdb::par::map_coarse;
use hopdb::query::DistanceIndex;
use hopdb::{build_index, BuildConfig, BuildMode, Graph, RankAssignment, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

const PLAIN: Class = Class { directed: false, weighted: false };
const SCALE_DENSITIES: [f64; 3] = [5.0, 10.0, 20.0];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn build(g: &Graph, r: &RankAssignment, cfg: BuildConfig) -> hopdb::labeling::BuildOutcome {
    build_index(g, r, &cfg).unwrap()
}

fn mismatch(idx: &dyn DistanceIndex, truth: &hopdb::oracle::DistanceMatrix) -> Option<String> {
    common::first_mismatch(idx, truth).map(|(s, t, got, want)| format!("query({s}, {t}) = {got}, oracle {want}"))
}

struct CorpusGraph {
    name: String,
    g: Graph,
}

/// 100 seeded GLP graphs per class, n in [10, 300], density in [1, 10].
fn corpus() -> &'static [CorpusGraph] {
    static CORPUS: OnceLock<Vec<CorpusGraph>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut out = Vec::new();
        for class in CLASSES {
            for i in 0..100u64 {
                let n = rng.gen_range(10..=300);
                let density = rng.gen_range(1.0..=10.0);
                let seed = 1000 * (class.directed as u64 * 2 + class.weighted as u64) + i;
                let name = format!("{class:?} n={n} density={density:.2} seed={seed}");
                out.push(CorpusGraph { name, g: glp_graph(n, density, class, seed) });
            }
        }
        out
    })
}

fn criterion_1() -> Outcome {
    let graphs = corpus();
    let failures = map_coarse(graphs.len(), true, |i| {
        let c = &graphs[i];
        let r = rank_by_degree(&c.g, RankStrategy::Degree);
        let truth = all_pairs(&c.g);
        for mode in [BuildMode::Stepping, BuildMode::Doubling, BuildMode::Hybrid] {
            let idx = build(&c.g, &r, BuildConfig::with_mode(mode)).index;
            if let Some(m) = mismatch(&idx, &truth) {
                return Some(format!("{}: {mode:?}: {m}", c.name));
            }
        }
        None
    });
    let pairs: usize = graphs.iter().map(|c| c.g.num_vertices().pow(2)).sum();
    match failures.into_iter().flatten().next() {
        Some(f) => Err(f),
        None => Ok(format!("{} graphs x 3 modes, {pairs} pairs per mode, zero mismatches", graphs.len())),
    }
}

fn criterion_2() -> Outcome {
    let graphs = corpus();
    let rows = map_coarse(graphs.len(), true, |i| {
        let c = &graphs[i];
        let r = rank_by_degree(&c.g, RankStrategy::Degree);
        let dh = hop_diameter(&c.g);
        let step = build(&c.g, &r, BuildConfig::with_mode(BuildMode::Stepping)).productive_iterations;
        let dbl = build(&c.g, &r, BuildConfig::with_mode(BuildMode::Doubling)).productive_iterations;
        (c.g.is_weighted(), dh, step, dbl, c.name.clone())
    });
    let mut advisory = 0;
    let mut checked = 0;
    for (weighted, dh, step, dbl, name) in rows {
        let ok = step <= lemmas::bound(BuildMode::Stepping, dh) && dbl <= lemmas::bound(BuildMode::Doubling, dh);
        if weighted {
            if !ok {
                advisory += 1;
                eprintln!("  advisory: {name}: D_H = {dh}, stepping {step}, doubling {dbl}");
            }
        } else {
            checked += 1;
            ensure(ok, || format!("{name}: D_H = {dh}, stepping {step}, doubling {dbl}"))?;
        }
    }
    Ok(format!("{checked} unweighted graphs within bounds; {advisory} weighted graphs over the advisory bound"))
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    let mut graphs: Vec<Graph> = Vec::new();
    for class in CLASSES {
        for seed in 0..20u64 {
            let n = 3 + (seed % 8) as usize;
            graphs.push(random_graph(n, 0.2 + 0.05 * (seed % 5) as f64, class, 7000 + seed));
        }
    }
    graphs.push(generate_named(NamedShape::Path, 10));
    graphs.push(generate_named(NamedShape::Cycle, 10));
    graphs.push(generate_named(NamedShape::Star, 10));
    graphs.push(generate_named(NamedShape::Clique, 7));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (i, g) in graphs.iter().enumerate() {
        let n = g.num_vertices() as VertexId;
        let mut shuffled: Vec<VertexId> = (0..n).collect();
        for k in (1..shuffled.len()).rev() {
            shuffled.swap(k, rng.gen_range(0..=k));
        }
        for r in [rank_by_degree(g, RankStrategy::Degree), RankAssignment::from_order(shuffled).unwrap()] {
            lemmas::check_stepping(g, &r).map_err(|m| format!("graph {i}: stepping: {m}"))?;
            lemmas::check_doubling(g, &r).map_err(|m| format!("graph {i}: doubling: {m}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (graph, ranking) combinations with n <= 10 match through enumeration"))
}

fn criterion_4() -> Outcome {
    let graphs = corpus();
    let failures = map_coarse(graphs.len(), true, |i| {
        let c = &graphs[i];
        let r = rank_by_degree(&c.g, RankStrategy::Degree);
        let pruned = build(&c.g, &r, BuildConfig::default()).index;
        let full = build(&c.g, &r, BuildConfig { prune: false, ..BuildConfig::default() }).index;
        if pruned.total_entries() > full.total_entries() {
            return Some(format!("{}: pruned index is larger", c.name));
        }
        let n = c.g.num_vertices() as VertexId;
        for s in 0..n {
            for t in 0..n {
                let (a, b) = (pruned.query(s, t).unwrap().distance, full.query(s, t).unwrap().distance);
                if a != b {
                    return Some(format!("{}: query({s}, {t}) pruned {a}, unpruned {b}", c.name));
                }
            }
        }
        None
    });
    if let Some(f) = failures.into_iter().flatten().next() {
        return Err(f);
    }
    let g = generate_glp(10_000, &GlpParams::with_density(10.0), 4).unwrap();
    let r = rank_by_degree(&g, RankStrategy::Degree);
    let pruned = build(&g, &r, BuildConfig::default()).index.total_entries();
    let full = build(&g, &r, BuildConfig { prune: false, ..BuildConfig::default() }).index.total_entries();
    let ratio = pruned as f64 / full as f64;
    ensure(ratio < 0.5, || format!("GLP n=10^4 density 10: pruned/unpruned = {ratio:.3} ({pruned} / {full})"))?;
    Ok(format!("{} corpus graphs identical; GLP n=10^4 d=10 pruned/unpruned = {ratio:.3}", graphs.len()))
}

fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases = [
        ("GLP n=25000 d=4", glp_graph(25_000, 4.0, PLAIN, 2)),
        ("directed weighted GLP n=12000 d=4", glp_graph(12_000, 4.0, Class { directed: true, weighted: true }, 3)),
        ("weighted GLP n=20000 d=2.5", glp_graph(20_000, 2.5, Class { directed: false, weighted: true }, 4)),
    ];
    let mut largest = 0;
    for (name, g) in &cases {
        ensure(g.num_edges() <= 110_000, || format!("{name}: {} edges", g.num_edges()))?;
        largest = largest.max(g.num_edges());
        let r = rank_by_degree(g, RankStrategy::Degree);
        let cfg = BuildConfig::default();
        let mem = build(g, &r, cfg);
        let want = dir.path().join("mem.hdx");
        write_label_index(&mem.index, None, DistWidth::U32, &want).map_err(|e| e.to_string())?;
        let want = std::fs::read(&want).map_err(|e| e.to_string())?;
        let opts = ExtmemOptions {
            budget: MemoryBudget::new(256 << 10, 16 << 10).unwrap(),
            workdir: dir.path().join("work"),
            width: DistWidth::U32,
        };
        let mut runs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("ext{k}.hdx"));
            let out = extmem_build(g, &r, &cfg, &opts, &path).map_err(|e| format!("{name}: {e}"))?;
            ensure(out.stats == mem.stats, || format!("{name}: iteration counters differ"))?;
            runs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(runs[0] == want, || format!("{name}: external index differs from in-memory index"))?;
        ensure(runs[1] == runs[0], || format!("{name}: rerun is not bit-identical"))?;
    }
    Ok(format!("{} graphs up to {largest} edges at M = 256 KiB, identical to in-memory and across reruns", cases.len()))
}

/// GLP n = 5 x 10^4 builds shared by criteria 6, 7 and 8.
struct ScaleBuild {
    density: f64,
    g: Graph,
    r: RankAssignment,
    idx: LabelIndex,
}

fn scale_builds() -> &'static [ScaleBuild] {
    static BUILDS: OnceLock<Vec<ScaleBuild>> = OnceLock::new();
    BUILDS.get_or_init(|| {
        SCALE_DENSITIES
            .iter()
            .map(|&density| {
                let t = Instant::now();
                let g = generate_glp(50_000, &GlpParams::with_density(density), 1).unwrap();
                let r = rank_by_degree(&g, RankStrategy::Degree);
                let idx = build(&g, &r, BuildConfig::default()).index;
                eprintln!("  GLP n=50000 density {density}: built in {:.1}s", t.elapsed().as_secs_f64());
                ScaleBuild { density, g, r, idx }
            })
            .collect()
    })
}

fn criterion_6() -> Outcome {
    let mut small = Vec::new();
    for seed in 0..12u64 {
        small.push(glp_graph(20 + 23 * seed as usize, 1.5 + seed as f64 / 2.0, PLAIN, 300 + seed));
    }
    for seed in 0..10u64 {
        small.push(random_graph(15 + 12 * seed as usize, 0.04 + 0.01 * seed as f64, PLAIN, 500 + seed));
    }
    for (i, g) in small.iter().enumerate() {
        let r = rank_by_degree(g, RankStrategy::Degree);
        let idx = build(g, &r, BuildConfig::default()).index;
        let bp = bp_transform(&idx, g, &r, 50).map_err(|e| e.to_string())?;
        let n = g.num_vertices() as VertexId;
        for s in 0..n {
            for t in 0..n {
                let (a, b) = (bp.query(s, t).unwrap().distance, idx.query(s, t).unwrap().distance);
                ensure(a == b, || format!("small graph {i}: bp({s}, {t}) = {a}, plain {b}"))?;
            }
        }
    }
    let big = &scale_builds()[0];
    let bp = bp_transform(&big.idx, &big.g, &big.r, 50).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = big.g.num_vertices() as VertexId;
    for _ in 0..10_000 {
        let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (a, b) = (bp.query(s, t).unwrap().distance, big.idx.query(s, t).unwrap().distance);
        ensure(a == b, || format!("GLP n=5x10^4: bp({s}, {t}) = {a}, plain {b}"))?;
    }
    Ok(format!("{} small graphs all pairs, GLP n=5x10^4 (d={}) 10^4 sampled pairs", small.len(), big.density))
}

fn criterion_7() -> Outcome {
    let builds = scale_builds();
    let avgs: Vec<f64> = builds.iter().map(|b| b.idx.avg_label_size()).collect();
    let summary = builds.iter().zip(&avgs).map(|(b, a)| format!("d={} avg={a:.1}", b.density)).collect::<Vec<_>>();
    for (b, &a) in builds.iter().zip(&avgs) {
        ensure(a < 500.0, || format!("density {}: average label size {a:.1}", b.density))?;
    }
    for w in 0..builds.len() - 1 {
        let growth = avgs[w + 1] / avgs[w];
        let density_ratio = builds[w + 1].density / builds[w].density;
        ensure(growth < density_ratio, || {
            format!(
                "densities {} -> {}: labels grew {growth:.2}x vs {density_ratio:.2}x",
                builds[w].density,
                builds[w + 1].density
            )
        })?;
    }
    Ok(summary.join(", "))
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    for b in scale_builds() {
        let share = coverage_by_top(&b.idx, &b.r, &[0.01]).by_fraction[0].1;
        ensure(share >= 0.8, || format!("density {}: top 1% cover {share:.3}", b.density))?;
        parts.push(format!("d={} {share:.3}", b.density));
    }
    Ok(format!("top-1% coverage: {}", parts.join(", ")))
}

fn criterion_9() -> Outcome {
    // Path of 30 edges hanging off a GLP core.
    let core = generate_glp(400, &GlpParams::with_density(3.0), 9).unwrap();
    let n = core.num_vertices() as VertexId;
    let mut edges: Vec<(VertexId, VertexId, u32)> = core.edges().filter(|&(u, v, _)| u < v).collect();
    let mut prev = n - 1;
    for v in n..n + 30 {
        edges.push((prev, v, 1));
        prev = v;
    }
    let g = Graph::from_edges(n as usize + 30, false, false, edges).unwrap();
    let dh = hop_diameter(&g);
    ensure(dh >= 24, || format!("D_H = {dh}"))?;
    let r = rank_by_degree(&g, RankStrategy::Degree);
    let step = build(&g, &r, BuildConfig::with_mode(BuildMode::Stepping));
    let hybrid = build(&g, &r, BuildConfig::with_mode(BuildMode::Hybrid));
    let dbl = build(&g, &r, BuildConfig::with_mode(BuildMode::Doubling));
    ensure(step.index == hybrid.index && dbl.index == hybrid.index, || "modes built different indexes".into())?;
    ensure(hybrid.iterations < step.iterations, || {
        format!("hybrid {} iterations, stepping {}", hybrid.iterations, step.iterations)
    })?;
    Ok(format!(
        "D_H = {dh}: stepping {} iterations, hybrid {}, doubling {}",
        step.iterations, hybrid.iterations, dbl.iterations
    ))
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("exactness on the seeded corpus", criterion_1),
        ("iteration bounds", criterion_2),
        ("coverage lemmas on tiny graphs", criterion_3),
        ("pruning soundness and benefit", criterion_4),
        ("external-memory fidelity", criterion_5),
        ("bit-parallel equivalence", criterion_6),
        ("label size on scale-free graphs", criterion_7),
        ("coverage concentration", criterion_8),
        ("hybrid schedule", criterion_9),
    ];
    // Keep panics from individual checks out of the PASS/FAIL lines.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

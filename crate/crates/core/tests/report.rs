mod common;

use common::{glp_graph, random_graph, CLASSES};
use hopdb::extmem::{extmem_build, DiskIndex, DistWidth, ExtmemOptions, MemoryBudget};
use hopdb::graph::{rank_by_degree, RankStrategy};
use hopdb::labeling::{IterationMode, IterationStats};
use hopdb::report::{emit_report, BuildReport, ReportFormat};
use hopdb::{build_index, BuildConfig, BuildMode, Graph};

fn report(g: &Graph, cfg: &BuildConfig) -> BuildReport {
    let r = rank_by_degree(g, RankStrategy::Degree);
    let out = build_index(g, &r, cfg).unwrap();
    BuildReport::new(g, &r, &out.index, out.stats)
}

/// Growing factors from iteration 3 on; iteration 2 joins the edge set with
/// itself in every mode.
fn later_factors(stats: &[IterationStats]) -> Vec<f64> {
    stats.iter().filter(|s| s.iteration >= 3 && s.prev_entries > 0).map(IterationStats::growing_factor).collect()
}

#[test]
fn stepping_grows_slower_than_doubling() {
    let g = glp_graph(10_000, 5.0, common::Class { directed: false, weighted: false }, 1);
    let step = report(&g, &BuildConfig::with_mode(BuildMode::Stepping));
    let dbl = report(&g, &BuildConfig::with_mode(BuildMode::Doubling));
    assert_eq!(step.index_entries, dbl.index_entries);
    assert_eq!(step.iterations[1].candidates_generated, dbl.iterations[1].candidates_generated);

    let s = later_factors(&step.iterations);
    let d = later_factors(&dbl.iterations);
    assert!(!s.is_empty() && !d.is_empty());
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let d_min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(s_max < d_min, "stepping {s:?} vs doubling {d:?}");
    assert!(step.iterations.iter().skip(1).all(|it| it.mode == IterationMode::Stepping));
    assert!(dbl.iterations.iter().skip(1).all(|it| it.mode == IterationMode::Doubling));
}

#[test]
fn counters_add_up_on_corpus() {
    let mut graphs = Vec::new();
    for (i, class) in CLASSES.iter().enumerate() {
        graphs.push(glp_graph(300, 3.0, *class, 40 + i as u64));
        graphs.push(random_graph(80, 0.05, *class, 50 + i as u64));
    }
    for g in &graphs {
        for mode in [BuildMode::Stepping, BuildMode::Doubling, BuildMode::Hybrid] {
            for prune in [true, false] {
                let rep = report(g, &BuildConfig { prune, ..BuildConfig::with_mode(mode) });
                for it in &rep.iterations {
                    let pf = it.pruning_factor();
                    assert!((0.0..=1.0).contains(&pf));
                    assert_eq!(
                        it.candidates_generated,
                        it.candidates_discarded + it.candidates_pruned + it.new_entries
                    );
                    if !prune {
                        assert_eq!(it.candidates_pruned, 0);
                    }
                }
                let sides = if g.is_directed() { 2 } else { 1 };
                let trivial = sides * g.num_vertices() as u64;
                // Improvements of existing keys count as new without adding an entry.
                assert!(rep.total_new() + trivial >= rep.index_entries);
                if !g.is_weighted() && mode == BuildMode::Stepping {
                    assert_eq!(rep.total_new() + trivial, rep.index_entries);
                }
                assert_eq!(rep.index_entries - trivial, rep.non_trivial_entries);
                let avg = rep.index_entries as f64 / g.num_vertices() as f64;
                assert!((rep.avg_label_size() - avg).abs() < 1e-12);
                let shares: Vec<f64> = rep.top_share.iter().map(|p| p.1).collect();
                assert!(shares.windows(2).all(|w| w[0] <= w[1]));
                assert!(rep.coverage.iter().all(|&(_, f)| (0.0..=1.0).contains(&f)));
            }
        }
    }
}

#[test]
fn disk_report_matches_memory_report() {
    let g = glp_graph(1500, 4.0, common::Class { directed: true, weighted: true }, 8);
    let r = rank_by_degree(&g, RankStrategy::Degree);
    let cfg = BuildConfig::default();
    let mem = report(&g, &cfg);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.hdx");
    let opts = ExtmemOptions {
        budget: MemoryBudget::new(64 << 10, 4096).unwrap(),
        workdir: dir.path().join("work"),
        width: DistWidth::U32,
    };
    let out = extmem_build(&g, &r, &cfg, &opts, &path).unwrap();
    let mut disk = BuildReport::from_disk(&g, &r, &DiskIndex::open(&path).unwrap(), out.stats).unwrap();
    assert_eq!(disk.iterations, mem.iterations);
    assert_eq!(disk.coverage, mem.coverage);
    assert_eq!(disk.top_share, mem.top_share);
    assert_eq!(disk.index_entries, mem.index_entries);
    assert_eq!(disk.non_trivial_entries, mem.non_trivial_entries);
    assert_eq!(disk.index_bytes, std::fs::metadata(&path).unwrap().len());

    disk.io = out.io;
    let files = disk.csv_files();
    let get = |name: &str| files.iter().find(|f| f.0 == name).map(|f| f.1.as_str()).unwrap();
    let parsed =
        BuildReport::from_csv(get("summary.csv"), get("iterations.csv"), get("coverage.csv"), Some(get("io.csv")))
            .unwrap();
    assert_eq!(parsed.csv_files(), files);
    assert_eq!(emit_report(&parsed, ReportFormat::Csv), emit_report(&disk, ReportFormat::Csv));
    let human = emit_report(&disk, ReportFormat::Human);
    assert!(human.contains("reads") && human.contains("1500 vertices"));
}

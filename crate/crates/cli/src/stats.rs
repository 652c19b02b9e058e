use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};

use hopdb::extmem::DiskIndex;
use hopdb::graph::load_ranking;
use hopdb::labeling::{Coverage, COVERAGE_TARGETS};
use hopdb::report::{histogram_csv, size_histogram, TOP_FRACTIONS};

use crate::args::{FormatArg, StatsArgs};
use crate::build::sidecar;
use crate::fail::Fail;

pub fn cmd_stats(a: &StatsArgs) -> Result<(), Fail> {
    let path = &a.index;
    let at = |e: hopdb::extmem::FormatError| Fail::from(e).context(path.display());
    let idx = DiskIndex::open(path).map_err(at)?;
    let h = *idx.header();
    let n = h.n as usize;

    let rank_path = sidecar(path, ".rank");
    let rank_file = File::open(&rank_path).map_err(|e| Fail::from(e).context(rank_path.display()))?;
    let r = load_ranking(BufReader::new(rank_file), n).map_err(|e| Fail::from(e).context(rank_path.display()))?;

    let counts = idx.pivot_counts().map_err(|e| Fail::from(e).context(path.display()))?;
    let cov = Coverage::from_pivot_counts(&counts, &r).table(&TOP_FRACTIONS);
    let hist = size_histogram(idx.label_sizes());
    let bp = idx.load_bp().map_err(at)?;
    let entries = idx.total_entries();

    let mut coverage_csv = String::from("target,fraction_of_top_vertices\n");
    for &(t, f) in &cov.by_target {
        let _ = writeln!(coverage_csv, "{t:.6},{f:.6}");
    }
    let mut summary = String::from("key,value\n");
    let _ = writeln!(summary, "vertices,{n}");
    let _ = writeln!(summary, "directed,{}", h.directed);
    let _ = writeln!(summary, "index_bytes,{}", fs::metadata(path)?.len());
    let _ = writeln!(summary, "index_entries,{entries}");
    let _ = writeln!(summary, "avg_label_size,{:.6}", entries as f64 / n.max(1) as f64);
    for &(f, share) in &cov.by_fraction {
        let _ = writeln!(summary, "top_{f}_share,{share:.6}");
    }
    if let Some(bp) = &bp {
        let _ = writeln!(summary, "bp_roots,{}", bp.roots().len());
        let _ = writeln!(summary, "bp_tuples,{}", bp.total_tuples());
    }
    let files = [("summary.csv", summary), ("coverage.csv", coverage_csv), ("histogram.csv", histogram_csv(&hist))];

    let text = match a.format {
        FormatArg::Csv => files.iter().map(|(name, body)| format!("# {name}\n{body}")).collect::<String>(),
        FormatArg::Human => {
            let mut s = String::new();
            let _ = writeln!(s, "{} vertices, {}", n, if h.directed { "directed" } else { "undirected" });
            let _ = writeln!(s, "{entries} label entries, {:.1} per vertex", entries as f64 / n.max(1) as f64);
            if let Some(bp) = &bp {
                let _ = writeln!(s, "bit-parallel: {} roots, {} tuples", bp.roots().len(), bp.total_tuples());
            }
            for (t, f) in COVERAGE_TARGETS.iter().zip(cov.by_target.iter().map(|p| p.1)) {
                let _ = writeln!(
                    s,
                    "{:>5.1}% of entries have pivots among the top {:.3}% of vertices",
                    t * 100.0,
                    f * 100.0
                );
            }
            let _ = writeln!(s, "label sizes:");
            let mut lo = 0;
            for &(hi, count) in &hist {
                let _ = writeln!(s, "  {lo:>7}..={hi:<7} {count}");
                lo = hi + 1;
            }
            s
        }
    };
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;

    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).map_err(|e| Fail::from(e).context(dir.display()))?;
        for (name, body) in &files {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Fail::from(e).context(p.display()))?;
        }
    }
    Ok(())
}

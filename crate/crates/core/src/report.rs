//! Build diagnostics and their CSV / human-readable forms.
//!
//! CSV files:
//!
//! * `iterations.csv`: `iteration,mode,candidates,pruned,new,growing_factor,pruning_factor`
//! * `coverage.csv`: `target,fraction_of_top_vertices`
//! * `io.csv` (external builds): `iteration,reads,writes,candidates,pruned,new`
//! * `summary.csv`: `key,value`, one row per scalar
//!
//! Only raw counters are read back by [`BuildReport::from_csv`]; ratios are
//! recomputed, so emitting a parsed report reproduces the files exactly.
//! Wall-clock time appears in the human form only.

use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

use crate::extmem::{DiskIndex, IterationIo};
use crate::graph::{Graph, RankAssignment};
use crate::labeling::{Coverage, IterationMode, IterationStats, LabelIndex};

/// Vertex fractions whose coverage goes into the summary.
pub const TOP_FRACTIONS: [f64; 3] = [0.001, 0.01, 0.1];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GraphSummary {
    pub vertices: u64,
    pub edges: u64,
    pub max_degree: u64,
    pub directed: bool,
    pub weighted: bool,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> GraphSummary {
        GraphSummary {
            vertices: g.num_vertices() as u64,
            edges: g.num_edges() as u64,
            max_degree: g.max_degree() as u64,
            directed: g.is_directed(),
            weighted: g.is_weighted(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BuildReport {
    pub graph: GraphSummary,
    pub iterations: Vec<IterationStats>,
    /// Block transfers per iteration; empty for in-memory builds.
    pub io: Vec<IterationIo>,
    pub index_bytes: u64,
    /// Entries over both sides, trivial ones included.
    pub index_entries: u64,
    pub non_trivial_entries: u64,
    /// (target share of entries, smallest fraction of top vertices reaching it)
    pub coverage: Vec<(f64, f64)>,
    /// (fraction of top vertices, share of entries they cover)
    pub top_share: Vec<(f64, f64)>,
    pub wall_clock: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Human,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{file}: {msg}")]
    Parse { file: &'static str, msg: String },
}

fn bad(file: &'static str, msg: impl Into<String>) -> ReportError {
    ReportError::Parse { file, msg: msg.into() }
}

impl BuildReport {
    /// Fills the index-derived fields; counters come from the build.
    pub fn new(g: &Graph, r: &RankAssignment, idx: &LabelIndex, iterations: Vec<IterationStats>) -> BuildReport {
        let cov = Coverage::compute(idx, r).table(&TOP_FRACTIONS);
        BuildReport {
            graph: GraphSummary::of(g),
            iterations,
            io: Vec::new(),
            index_bytes: idx.size_bytes() as u64,
            index_entries: idx.total_entries() as u64,
            non_trivial_entries: idx.non_trivial_entries() as u64,
            coverage: cov.by_target,
            top_share: cov.by_fraction,
            wall_clock: Duration::ZERO,
        }
    }

    /// Same as [`BuildReport::new`] for an index file, reading labels one at
    /// a time.
    pub fn from_disk(
        g: &Graph,
        r: &RankAssignment,
        idx: &DiskIndex,
        iterations: Vec<IterationStats>,
    ) -> std::io::Result<BuildReport> {
        let cov = Coverage::from_pivot_counts(&idx.pivot_counts()?, r).table(&TOP_FRACTIONS);
        let sides = if idx.is_directed() { 2 } else { 1 };
        Ok(BuildReport {
            graph: GraphSummary::of(g),
            iterations,
            io: Vec::new(),
            index_bytes: std::fs::metadata(idx.path())?.len(),
            index_entries: idx.total_entries(),
            non_trivial_entries: idx.total_entries() - sides * g.num_vertices() as u64,
            coverage: cov.by_target,
            top_share: cov.by_fraction,
            wall_clock: Duration::ZERO,
        })
    }

    pub fn avg_label_size(&self) -> f64 {
        self.index_entries as f64 / self.graph.vertices.max(1) as f64
    }

    pub fn total_generated(&self) -> u64 {
        self.iterations.iter().map(|s| s.candidates_generated).sum()
    }

    pub fn total_discarded(&self) -> u64 {
        self.iterations.iter().map(|s| s.candidates_discarded).sum()
    }

    pub fn total_pruned(&self) -> u64 {
        self.iterations.iter().map(|s| s.candidates_pruned).sum()
    }

    pub fn total_new(&self) -> u64 {
        self.iterations.iter().map(|s| s.new_entries).sum()
    }

    /// Last iteration that added entries.
    pub fn productive_iterations(&self) -> u32 {
        self.iterations.iter().filter(|s| s.new_entries > 0).map(|s| s.iteration).max().unwrap_or(0)
    }

    pub fn iterations_csv(&self) -> String {
        let mut s = String::from("iteration,mode,candidates,pruned,new,growing_factor,pruning_factor\n");
        for it in &self.iterations {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.6},{:.6}",
                it.iteration,
                it.mode,
                it.candidates_generated,
                it.candidates_pruned,
                it.new_entries,
                it.growing_factor(),
                it.pruning_factor()
            );
        }
        s
    }

    pub fn coverage_csv(&self) -> String {
        let mut s = String::from("target,fraction_of_top_vertices\n");
        for &(t, f) in &self.coverage {
            let _ = writeln!(s, "{t:.6},{f:.6}");
        }
        s
    }

    pub fn io_csv(&self) -> String {
        let mut s = String::from("iteration,reads,writes,candidates,pruned,new\n");
        for io in &self.io {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                io.iteration, io.reads, io.writes, io.candidates, io.pruned, io.new_entries
            );
        }
        s
    }

    fn summary_rows(&self) -> Vec<(String, String)> {
        let g = &self.graph;
        let mut rows: Vec<(String, String)> = vec![
            ("vertices".into(), g.vertices.to_string()),
            ("edges".into(), g.edges.to_string()),
            ("max_degree".into(), g.max_degree.to_string()),
            ("directed".into(), g.directed.to_string()),
            ("weighted".into(), g.weighted.to_string()),
            ("iterations".into(), self.iterations.last().map_or(0, |s| s.iteration).to_string()),
            ("productive_iterations".into(), self.productive_iterations().to_string()),
            ("candidates".into(), self.total_generated().to_string()),
            ("discarded".into(), self.total_discarded().to_string()),
            ("pruned".into(), self.total_pruned().to_string()),
            ("new".into(), self.total_new().to_string()),
            ("index_bytes".into(), self.index_bytes.to_string()),
            ("index_entries".into(), self.index_entries.to_string()),
            ("non_trivial_entries".into(), self.non_trivial_entries.to_string()),
            ("avg_label_size".into(), format!("{:.6}", self.avg_label_size())),
        ];
        for &(f, share) in &self.top_share {
            rows.push((format!("top_{f}_share"), format!("{share:.6}")));
        }
        if !self.io.is_empty() {
            rows.push(("io_reads".into(), self.io.iter().map(|i| i.reads).sum::<u64>().to_string()));
            rows.push(("io_writes".into(), self.io.iter().map(|i| i.writes).sum::<u64>().to_string()));
        }
        rows
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        for (k, v) in self.summary_rows() {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    /// File name and contents of every CSV the report produces.
    pub fn csv_files(&self) -> Vec<(&'static str, String)> {
        let mut files = vec![
            ("summary.csv", self.summary_csv()),
            ("iterations.csv", self.iterations_csv()),
            ("coverage.csv", self.coverage_csv()),
        ];
        if !self.io.is_empty() {
            files.push(("io.csv", self.io_csv()));
        }
        files
    }

    pub fn human(&self) -> String {
        let g = &self.graph;
        let mut s = String::new();
        let kind = match (g.directed, g.weighted) {
            (true, true) => "directed, weighted",
            (true, false) => "directed",
            (false, true) => "undirected, weighted",
            (false, false) => "undirected",
        };
        let _ = writeln!(s, "graph: {} vertices, {} edges, max degree {} ({kind})", g.vertices, g.edges, g.max_degree);
        let _ = writeln!(
            s,
            "index: {} entries ({} non-trivial), {:.2} per vertex, {} bytes",
            self.index_entries,
            self.non_trivial_entries,
            self.avg_label_size(),
            self.index_bytes
        );
        let _ = writeln!(s, "build: {} iterations in {:.3}s", self.iterations.len(), self.wall_clock.as_secs_f64());
        if !self.iterations.is_empty() {
            let _ = writeln!(
                s,
                "\n{:>5} {:>9} {:>12} {:>12} {:>12} {:>8} {:>8}",
                "iter", "mode", "candidates", "pruned", "new", "growing", "pruning"
            );
            for it in &self.iterations {
                let _ = writeln!(
                    s,
                    "{:>5} {:>9} {:>12} {:>12} {:>12} {:>8.3} {:>8.3}",
                    it.iteration,
                    it.mode.to_string(),
                    it.candidates_generated,
                    it.candidates_pruned,
                    it.new_entries,
                    it.growing_factor(),
                    it.pruning_factor()
                );
            }
        }
        if !self.io.is_empty() {
            let _ = writeln!(s, "\n{:>5} {:>12} {:>12}", "iter", "reads", "writes");
            for io in &self.io {
                let _ = writeln!(s, "{:>5} {:>12} {:>12}", io.iteration, io.reads, io.writes);
            }
        }
        let _ = writeln!(s);
        for &(f, share) in &self.top_share {
            let _ = writeln!(s, "top {:.1}% of vertices cover {:.1}% of entries", f * 100.0, share * 100.0);
        }
        for &(t, f) in &self.coverage {
            let _ = writeln!(s, "{:.0}% of entries are covered by the top {:.2}% of vertices", t * 100.0, f * 100.0);
        }
        s
    }

    /// Rebuilds a report from its CSV files (`io` may be absent). Wall-clock
    /// time is not persisted and comes back as zero.
    pub fn from_csv(
        summary: &str,
        iterations: &str,
        coverage: &str,
        io: Option<&str>,
    ) -> Result<BuildReport, ReportError> {
        let mut rep = BuildReport::default();
        for (line, cols) in rows(summary, "summary.csv", "key,value", 2)? {
            let (k, v) = (cols[0], cols[1]);
            let int = || v.parse::<u64>().map_err(|e| bad("summary.csv", format!("line {line}: {e}")));
            let flag = || v.parse::<bool>().map_err(|e| bad("summary.csv", format!("line {line}: {e}")));
            match k {
                "vertices" => rep.graph.vertices = int()?,
                "edges" => rep.graph.edges = int()?,
                "max_degree" => rep.graph.max_degree = int()?,
                "directed" => rep.graph.directed = flag()?,
                "weighted" => rep.graph.weighted = flag()?,
                "index_bytes" => rep.index_bytes = int()?,
                "index_entries" => rep.index_entries = int()?,
                "non_trivial_entries" => rep.non_trivial_entries = int()?,
                _ => {
                    if let Some(f) = k.strip_prefix("top_").and_then(|k| k.strip_suffix("_share")) {
                        let f = f.parse().map_err(|_| bad("summary.csv", format!("line {line}: bad fraction")))?;
                        let share = v.parse().map_err(|_| bad("summary.csv", format!("line {line}: bad share")))?;
                        rep.top_share.push((f, share));
                    }
                }
            }
        }
        let mut prev_new = 0u64;
        for (line, c) in
            rows(iterations, "iterations.csv", "iteration,mode,candidates,pruned,new,growing_factor,pruning_factor", 7)?
        {
            let num = |i: usize| c[i].parse::<u64>().map_err(|e| bad("iterations.csv", format!("line {line}: {e}")));
            let mode = match c[1] {
                "init" => IterationMode::Init,
                "stepping" => IterationMode::Stepping,
                "doubling" => IterationMode::Doubling,
                m => return Err(bad("iterations.csv", format!("line {line}: unknown mode {m}"))),
            };
            let (generated, pruned, new) = (num(2)?, num(3)?, num(4)?);
            let discarded = generated
                .checked_sub(pruned + new)
                .ok_or_else(|| bad("iterations.csv", format!("line {line}: pruned + new exceed candidates")))?;
            rep.iterations.push(IterationStats {
                iteration: num(0)? as u32,
                mode,
                prev_entries: prev_new,
                candidates_generated: generated,
                candidates_discarded: discarded,
                candidates_pruned: pruned,
                new_entries: new,
            });
            prev_new = new;
        }
        for (line, c) in rows(coverage, "coverage.csv", "target,fraction_of_top_vertices", 2)? {
            let f = |i: usize| c[i].parse::<f64>().map_err(|e| bad("coverage.csv", format!("line {line}: {e}")));
            rep.coverage.push((f(0)?, f(1)?));
        }
        if let Some(io) = io {
            for (line, c) in rows(io, "io.csv", "iteration,reads,writes,candidates,pruned,new", 6)? {
                let num = |i: usize| c[i].parse::<u64>().map_err(|e| bad("io.csv", format!("line {line}: {e}")));
                rep.io.push(IterationIo {
                    iteration: num(0)? as u32,
                    reads: num(1)?,
                    writes: num(2)?,
                    candidates: num(3)?,
                    pruned: num(4)?,
                    new_entries: num(5)?,
                });
            }
        }
        Ok(rep)
    }
}

fn rows<'a>(
    text: &'a str,
    file: &'static str,
    header: &str,
    width: usize,
) -> Result<Vec<(usize, Vec<&'a str>)>, ReportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        _ => return Err(bad(file, format!("expected header {header}"))),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let cols: Vec<&str> = l.split(',').collect();
            if cols.len() != width {
                return Err(bad(file, format!("line {}: expected {width} columns", i + 1)));
            }
            Ok((i + 1, cols))
        })
        .collect()
}

/// Renders a report.
pub fn emit_report(report: &BuildReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Human => report.human(),
        ReportFormat::Csv => report.csv_files().into_iter().map(|(name, body)| format!("# {name}\n{body}")).collect(),
    }
}

/// Label sizes (both sides) bucketed by powers of two: `(upper bound,
/// vertices)` where the bucket holds sizes in `(upper / 2, upper]` and the
/// first bucket holds sizes up to 1.
pub fn label_size_histogram(idx: &LabelIndex) -> Vec<(u64, u64)> {
    let sizes = (0..idx.num_vertices() as u32).map(|v| {
        let out = idx.out_label(v).len() as u64;
        out + if idx.is_directed() { idx.in_label(v).len() as u64 } else { 0 }
    });
    size_histogram(sizes)
}

pub fn size_histogram<I: IntoIterator<Item = u64>>(sizes: I) -> Vec<(u64, u64)> {
    let mut buckets: Vec<u64> = Vec::new();
    for size in sizes {
        let b = if size <= 1 { 0 } else { 64 - (size - 1).leading_zeros() as usize };
        if buckets.len() <= b {
            buckets.resize(b + 1, 0);
        }
        buckets[b] += 1;
    }
    buckets.into_iter().enumerate().map(|(b, c)| (1u64 << b, c)).collect()
}

pub fn histogram_csv(hist: &[(u64, u64)]) -> String {
    let mut s = String::from("max_label_size,vertices\n");
    for (b, c) in hist {
        let _ = writeln!(s, "{b},{c}");
    }
    s
}

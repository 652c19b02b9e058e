use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hopdb::extmem::DistWidth;
use hopdb::graph::RankStrategy;
use hopdb::{BuildConfig, BuildMode};

#[derive(Debug, Parser)]
#[command(name = "hopdb", version, about = "Exact shortest-path distances from 2-hop labels")]
pub struct Cli {
    /// Worker threads for building, verifying and batch queries.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index file from an edge list.
    Build(BuildArgs),
    /// Answer distance queries from an index file.
    Query(QueryArgs),
    /// Write a synthetic graph as an edge list.
    Gen(GenArgs),
    /// Label statistics of an existing index.
    Stats(StatsArgs),
    /// Check built indexes against exhaustive shortest paths.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Whitespace-separated `u v [length]` lines.
    Text,
    /// Binary graph file written by this tool's library.
    Binary,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph file; `-` reads standard input.
    pub graph: PathBuf,
    #[arg(long)]
    pub directed: bool,
    /// Edge lines carry a third column with the length.
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, value_enum, default_value_t = InputFormat::Text)]
    pub input_format: InputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RankArg {
    Degree,
    InOut,
}

impl From<RankArg> for RankStrategy {
    fn from(r: RankArg) -> Self {
        match r {
            RankArg::Degree => RankStrategy::Degree,
            RankArg::InOut => RankStrategy::InOutProduct,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Hybrid,
    Stepping,
    Doubling,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Vertex ordering used when no ranking file is given.
    #[arg(long, value_enum, default_value_t = RankArg::Degree)]
    pub rank: RankArg,
    /// One original vertex id per line, most important first.
    #[arg(long, conflicts_with = "rank")]
    pub rank_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Hybrid)]
    pub mode: ModeArg,
    /// Last stepping iteration in hybrid mode.
    #[arg(long, default_value_t = 10)]
    pub switch_iter: u32,
    /// Give up if labels still change after this many iterations.
    #[arg(long)]
    pub max_iter: Option<u32>,
    /// Keep every improving candidate (for experiments).
    #[arg(long)]
    pub no_prune: bool,
}

impl LabelArgs {
    pub fn config(&self, collect_stats: bool) -> BuildConfig {
        BuildConfig {
            mode: match self.mode {
                ModeArg::Hybrid => BuildMode::Hybrid,
                ModeArg::Stepping => BuildMode::Stepping,
                ModeArg::Doubling => BuildMode::Doubling,
            },
            switch_iteration: self.switch_iter,
            max_iterations: self.max_iter,
            collect_stats,
            prune: !self.no_prune,
            parallel: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WidthArg {
    #[value(name = "8")]
    W8,
    #[value(name = "32")]
    W32,
}

impl From<WidthArg> for DistWidth {
    fn from(w: WidthArg) -> Self {
        match w {
            WidthArg::W8 => DistWidth::U8,
            WidthArg::W32 => DistWidth::U32,
        }
    }
}

/// Byte count with an optional binary suffix (K, M, G, with or without
/// `iB`/`B`), or `unlimited`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Size {
    Bytes(usize),
    Unlimited,
}

pub fn parse_size(s: &str) -> Result<Size, String> {
    let t = s.trim().to_ascii_lowercase();
    if t == "unlimited" {
        return Ok(Size::Unlimited);
    }
    let split = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let base: usize = num.parse().map_err(|_| format!("bad size {s:?}"))?;
    let shift = match unit.trim() {
        "" | "b" => 0,
        "k" | "kb" | "kib" => 10,
        "m" | "mb" | "mib" => 20,
        "g" | "gb" | "gib" => 30,
        _ => return Err(format!("bad size unit in {s:?}")),
    };
    base.checked_mul(1usize << shift).map(Size::Bytes).ok_or_else(|| format!("size {s:?} too large"))
}

fn parse_bytes(s: &str) -> Result<usize, String> {
    match parse_size(s)? {
        Size::Bytes(b) => Ok(b),
        Size::Unlimited => Err("block size must be a byte count".into()),
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Index file to write.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub label: LabelArgs,
    /// Memory for the external build; `unlimited` builds in memory.
    #[arg(long, value_parser = parse_size, default_value = "1GiB")]
    pub memory: Size,
    /// Transfer unit of the external build.
    #[arg(long, value_parser = parse_bytes, default_value = "1MiB")]
    pub block: usize,
    /// Directory for temporary run files.
    #[arg(long, env = "HOPDB_WORKDIR")]
    pub workdir: Option<PathBuf>,
    /// Add bit-parallel labels (undirected unweighted graphs only).
    #[arg(long)]
    pub bp: bool,
    #[arg(long, default_value_t = 50, requires = "bp")]
    pub bp_roots: usize,
    /// Bits per stored distance.
    #[arg(long, value_enum, default_value_t = WidthArg::W32)]
    pub dist_width: WidthArg,
    /// Where the CSV reports go; defaults to `<output>.report`.
    #[arg(long)]
    pub report_dir: Option<PathBuf>,
    /// Skip per-iteration counters and reports.
    #[arg(long)]
    pub no_stats: bool,
    /// No summary on standard error.
    #[arg(short, long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub index: PathBuf,
    /// Single pair of original vertex ids.
    #[arg(long, num_args = 2, value_names = ["S", "T"], conflicts_with = "batch")]
    pub pair: Option<Vec<u64>>,
    /// File of `s t` lines; `-` reads standard input.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Load all labels into memory instead of reading them per query.
    #[arg(long)]
    pub in_memory: bool,
    /// Ignore the bit-parallel section even if the index has one.
    #[arg(long)]
    pub no_bp: bool,
    /// Pairs answered per parallel round in batch mode.
    #[arg(long, default_value_t = 4096)]
    pub chunk: usize,
    /// Print throughput and latency on standard error.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Glp,
    Star,
    Path,
    Cycle,
    Clique,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub shape: Shape,
    #[arg(short = 'n', long)]
    pub vertices: usize,
    /// Target edges per vertex (GLP only).
    #[arg(long, default_value_t = 2.0)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Human,
    Csv,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub index: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    pub format: FormatArg,
    /// Also write coverage.csv and histogram.csv here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Graph to check; omit together with `--glp` to check generated graphs.
    #[arg(required_unless_present = "glp")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub directed: bool,
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, value_enum, default_value_t = InputFormat::Text)]
    pub input_format: InputFormat,
    /// Check this many seeded GLP graphs instead of a file.
    #[arg(long, conflicts_with = "graph")]
    pub glp: Option<usize>,
    /// Largest generated graph.
    #[arg(long, default_value_t = 200)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Refuse graphs above this size; the oracle is quadratic in memory.
    #[arg(long, default_value_t = 5000)]
    pub max_vertices: usize,
    #[command(flatten)]
    pub label: LabelArgs,
    /// Build externally with this memory budget and query the index file.
    #[arg(long, value_parser = parse_size, default_value = "unlimited")]
    pub memory: Size,
    #[arg(long, value_parser = parse_bytes, default_value = "4KiB")]
    pub block: usize,
    #[arg(long, env = "HOPDB_WORKDIR")]
    pub workdir: Option<PathBuf>,
    /// Also check bit-parallel labels with this many roots.
    #[arg(long)]
    pub bp_roots: Option<usize>,
}

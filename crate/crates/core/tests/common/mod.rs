#![allow(dead_code)]

use hopdb::graph::{generate_glp, GlpParams};
use hopdb::labeling::LabelIndex;
use hopdb::oracle::{all_pairs, DistanceMatrix};
use hopdb::query::DistanceIndex;
use hopdb::{Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Class {
    pub directed: bool,
    pub weighted: bool,
}

pub const CLASSES: [Class; 4] = [
    Class { directed: false, weighted: false },
    Class { directed: false, weighted: true },
    Class { directed: true, weighted: false },
    Class { directed: true, weighted: true },
];

/// Erdos-Renyi style graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, class: Class, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in 0..n as VertexId {
            if u == v || (!class.directed && v < u) {
                continue;
            }
            if rng.gen::<f64>() < p {
                let w = if class.weighted { rng.gen_range(1..=9) } else { 1 };
                edges.push((u, v, w));
            }
        }
    }
    Graph::from_edges(n, class.directed, class.weighted, edges).unwrap()
}

/// GLP graph turned into the requested class: directed graphs orient each
/// edge at random (keeping both directions a third of the time); weighted
/// graphs draw lengths from 1..=10.
pub fn glp_graph(n: usize, density: f64, class: Class, seed: u64) -> Graph {
    let base = generate_glp(n, &GlpParams::with_density(density), seed).unwrap();
    if !class.directed && !class.weighted {
        return base;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut edges = Vec::new();
    for (u, v, _) in base.edges() {
        let mut len = || if class.weighted { rng.gen_range(1..=10) } else { 1 };
        if !class.directed {
            let w = len();
            edges.push((u, v, w));
            continue;
        }
        let (a, b) = (len(), len());
        match rng.gen_range(0..3) {
            0 => edges.push((u, v, a)),
            1 => edges.push((v, u, a)),
            _ => {
                edges.push((u, v, a));
                edges.push((v, u, b));
            }
        }
    }
    Graph::from_edges(n, class.directed, class.weighted, edges).unwrap()
}

/// First pair whose indexed distance differs from the oracle.
pub fn first_mismatch<I: DistanceIndex + ?Sized>(
    idx: &I,
    truth: &DistanceMatrix,
) -> Option<(VertexId, VertexId, u32, u32)> {
    let n = truth.num_vertices() as VertexId;
    for s in 0..n {
        for t in 0..n {
            let got = idx.query(s, t).unwrap().distance;
            let want = truth.get(s, t);
            if got != want {
                return Some((s, t, got, want));
            }
        }
    }
    None
}

pub fn assert_exact(idx: &LabelIndex, g: &Graph) {
    let truth = all_pairs(g);
    if let Some((s, t, got, want)) = first_mismatch(idx, &truth) {
        panic!("query({s}, {t}) = {got}, expected {want}");
    }
}

pub mod lemmas {
    use hopdb::graph::RankAssignment;
    use hopdb::labeling::{BuildConfig, BuildMode, Labeler, Labels, Side, StepMode};
    use hopdb::oracle::{trough_paths, TroughTable, INF};
    use hopdb::{Graph, VertexId};

    /// The entry that would certify a path from `a` to `b`, if stored.
    fn entry_for(all: &Labels, r: &RankAssignment, a: VertexId, b: VertexId) -> Option<u32> {
        if r.outranks(b, a) {
            all.find(Side::Out, a, b).map(|e| e.dist)
        } else {
            all.find(Side::In, b, a).map(|e| e.dist)
        }
    }

    fn pairs(g: &Graph) -> impl Iterator<Item = (VertexId, VertexId)> {
        let n = g.num_vertices() as VertexId;
        let directed = g.is_directed();
        (0..n).flat_map(move |a| (0..n).map(move |b| (a, b))).filter(move |&(a, b)| a != b && (directed || a < b))
    }

    fn unpruned(mode: BuildMode) -> BuildConfig {
        BuildConfig { mode, prune: false, parallel: false, ..BuildConfig::default() }
    }

    /// Without pruning, after stepping iteration `i` the stored entry for each
    /// pair equals the shortest trough path of at most `i` edges, and no entry
    /// exists when there is none.
    pub fn check_stepping(g: &Graph, r: &RankAssignment) -> Result<(), String> {
        let table = trough_paths(g, r, g.num_vertices().saturating_sub(1).max(1));
        let cfg = unpruned(BuildMode::Stepping);
        let mut lab = Labeler::new(g, r, cfg).map_err(|e| e.to_string())?;
        loop {
            let i = lab.state().iteration() as usize;
            compare_exact(g, r, lab.state().all(), &table, i)?;
            if lab.is_converged() {
                return compare_exact(g, r, lab.state().all(), &table, table.max_hops());
            }
            lab.step_with(StepMode::Stepping);
        }
    }

    fn compare_exact(g: &Graph, r: &RankAssignment, all: &Labels, t: &TroughTable, hops: usize) -> Result<(), String> {
        for (a, b) in pairs(g) {
            let want = t.min_within(a, b, hops);
            let got = entry_for(all, r, a, b).unwrap_or(INF);
            if got != want {
                return Err(format!("after {hops} hops: pair ({a}, {b}) has {got}, trough paths give {want}"));
            }
        }
        Ok(())
    }

    /// Without pruning, after doubling iteration `2i` every trough path of at
    /// most `2^i` edges is covered by an entry no longer than it, and no entry
    /// is shorter than the shortest trough path.
    pub fn check_doubling(g: &Graph, r: &RankAssignment) -> Result<(), String> {
        let table = trough_paths(g, r, g.num_vertices().saturating_sub(1).max(1));
        let mut lab = Labeler::new(g, r, unpruned(BuildMode::Doubling)).map_err(|e| e.to_string())?;
        loop {
            let it = lab.state().iteration();
            let all = lab.state().all();
            for (a, b) in pairs(g) {
                let got = entry_for(all, r, a, b).unwrap_or(INF);
                let floor = table.min_within(a, b, table.max_hops());
                if got < floor {
                    return Err(format!("iteration {it}: pair ({a}, {b}) has {got} below trough minimum {floor}"));
                }
                if it % 2 == 0 || it == 1 {
                    let span = 1usize << (it / 2).min(20);
                    let want = table.min_within(a, b, span);
                    if got > want {
                        return Err(format!(
                            "iteration {it}: pair ({a}, {b}) has {got}, {span}-hop trough path gives {want}"
                        ));
                    }
                }
            }
            if lab.is_converged() {
                return compare_exact(g, r, lab.state().all(), &table, table.max_hops());
            }
            lab.step_with(StepMode::Doubling);
        }
    }

    pub fn ceil_log2(x: u32) -> u32 {
        if x <= 1 {
            0
        } else {
            32 - (x - 1).leading_zeros()
        }
    }

    /// Productive-iteration bounds: `D_H` for stepping, `2 ceil(log2 D_H)`
    /// for doubling (at least 1 once there is an edge).
    pub fn bound(mode: BuildMode, hop_diameter: u32) -> u32 {
        if hop_diameter == 0 {
            return 0;
        }
        match mode {
            BuildMode::Stepping => hop_diameter,
            BuildMode::Doubling => (2 * ceil_log2(hop_diameter)).max(1),
            BuildMode::Hybrid => u32::MAX,
        }
    }
}

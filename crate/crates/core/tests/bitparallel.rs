mod common;

use common::{glp_graph, random_graph, Class};
use hopdb::bitparallel::{bp_transform, select_roots, BpIndex, MAX_NEIGHBORS};
use hopdb::graph::{rank_by_degree, RankStrategy};
use hopdb::labeling::LabelIndex;
use hopdb::oracle::all_pairs;
use hopdb::query::DistanceIndex;
use hopdb::{build_index, BuildConfig, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PLAIN: Class = Class { directed: false, weighted: false };

fn corpus() -> Vec<Graph> {
    let mut gs = Vec::new();
    for seed in 0..12u64 {
        gs.push(glp_graph(20 + 23 * seed as usize, 1.5 + seed as f64 / 2.0, PLAIN, 300 + seed));
    }
    for seed in 0..10u64 {
        gs.push(random_graph(15 + 12 * seed as usize, 0.04 + 0.01 * seed as f64, PLAIN, 500 + seed));
    }
    gs
}

fn check_structure(g: &Graph, bp: &BpIndex) {
    let mut owner = vec![None; g.num_vertices()];
    for (i, root) in bp.roots().iter().enumerate() {
        assert!(root.neighbors.len() <= MAX_NEIGHBORS);
        for &u in std::iter::once(&root.vertex).chain(&root.neighbors) {
            assert_eq!(owner[u as usize], None, "vertex {u} claimed twice");
            owner[u as usize] = Some(i);
        }
        for &u in &root.neighbors {
            assert!(g.out_edges(root.vertex).iter().any(|(w, _)| w == u));
        }
    }
    for v in 0..g.num_vertices() as u32 {
        let mut marker = 0u64;
        for t in bp.vertex_tuples(v) {
            assert_eq!(t.s_minus & t.s_zero, 0);
            let width = bp.roots()[t.root as usize].neighbors.len();
            if width < 64 {
                assert_eq!((t.s_minus | t.s_zero) >> width, 0);
            }
            marker |= 1 << t.root;
        }
        assert_eq!(marker, bp.marker(v));
        for i in 0..bp.roots().len() {
            assert_eq!(bp.tuple(v, i).is_some(), marker >> i & 1 == 1);
        }
    }
}

fn check_all_pairs(idx: &LabelIndex, bp: &BpIndex) {
    let n = idx.num_vertices() as u32;
    for s in 0..n {
        for t in 0..n {
            let plain = idx.query(s, t).unwrap().distance;
            let fast = bp.query_detailed(s, t).unwrap();
            assert_eq!(fast.result.distance, plain, "pair ({s}, {t})");
            let common = (bp.marker(s) & bp.marker(t)).count_ones() as u64;
            assert!(fast.tuples_touched <= common);
        }
    }
}

#[test]
fn equivalent_on_small_corpus() {
    let graphs = corpus();
    assert!(graphs.len() >= 20);
    for (gi, g) in graphs.iter().enumerate() {
        let r = rank_by_degree(g, RankStrategy::Degree);
        let idx = build_index(g, &r, &BuildConfig::default()).unwrap().index;
        let truth = all_pairs(g);
        for roots in [1, 6, 50] {
            let bp = bp_transform(&idx, g, &r, roots).unwrap();
            check_structure(g, &bp);
            check_all_pairs(&idx, &bp);
            assert_eq!(common::first_mismatch(&bp, &truth), None, "graph {gi} roots {roots}");
            assert!(bp.normal().len() <= idx.total_entries());
        }
    }
}

#[test]
fn roots_follow_rank_and_skip_claimed_vertices() {
    let g = glp_graph(400, 4.0, PLAIN, 9);
    let r = rank_by_degree(&g, RankStrategy::Degree);
    let roots = select_roots(&g, &r, 50);
    assert_eq!(roots[0].vertex, r.by_importance()[0]);
    for w in roots.windows(2) {
        assert!(r.outranks(w[0].vertex, w[1].vertex));
    }
    for root in &roots {
        for w in root.neighbors.windows(2) {
            assert!(r.outranks(w[0], w[1]));
        }
    }
}

#[test]
fn sampled_pairs_on_larger_glp() {
    let g = glp_graph(5000, 5.0, PLAIN, 17);
    let r = rank_by_degree(&g, RankStrategy::Degree);
    let idx = build_index(&g, &r, &BuildConfig::default()).unwrap().index;
    let bp = bp_transform(&idx, &g, &r, 50).unwrap();
    check_structure(&g, &bp);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let (s, t) = (rng.gen_range(0..5000), rng.gen_range(0..5000));
        assert_eq!(bp.query(s, t).unwrap().distance, idx.query(s, t).unwrap().distance, "pair ({s}, {t})");
    }
    assert!(bp.normal().len() < idx.total_entries());
}

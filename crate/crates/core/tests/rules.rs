//! Reference generator with all six original join rules, run without pruning
//! and compared round by round with the four simplified rules.

mod common;

use std::collections::BTreeMap;

use common::{random_graph, Class};
use hopdb::graph::{rank_by_degree, RankAssignment, RankStrategy};
use hopdb::labeling::{BuildConfig, Labeler, Side, StepMode};
use hopdb::{Graph, VertexId};

/// (owner, pivot) -> (dist, hops), one map per side. Trivial entries omitted.
#[derive(Clone, Debug, Default, PartialEq)]
struct RefLabels {
    out: BTreeMap<(VertexId, VertexId), (u32, u16)>,
    inn: BTreeMap<(VertexId, VertexId), (u32, u16)>,
}

impl RefLabels {
    fn len(&self) -> usize {
        self.out.len() + self.inn.len()
    }
}

struct Reference<'a> {
    r: &'a RankAssignment,
    all: RefLabels,
    prev: RefLabels,
}

impl<'a> Reference<'a> {
    /// The graph is treated as directed; undirected graphs pass both arcs.
    fn new(arcs: &[(VertexId, VertexId, u32)], r: &'a RankAssignment) -> Reference<'a> {
        let mut all = RefLabels::default();
        for &(u, v, w) in arcs {
            if r.outranks(v, u) {
                all.out.insert((u, v), (w, 1));
            } else {
                all.inn.insert((v, u), (w, 1));
            }
        }
        Reference { r, prev: all.clone(), all }
    }

    /// Files a path `a -> b` as an out-entry of `a` or an in-entry of `b`.
    fn emit(&self, cand: &mut RefLabels, a: VertexId, b: VertexId, d: u32, h: u16) {
        if a == b {
            return;
        }
        let (map, key) = if self.r.outranks(b, a) { (&mut cand.out, (a, b)) } else { (&mut cand.inn, (b, a)) };
        let slot = map.entry(key).or_insert((u32::MAX, u16::MAX));
        if (d, h) < *slot {
            *slot = (d, h);
        }
    }

    fn round(&mut self) -> bool {
        let mut cand = RefLabels::default();
        let all = &self.all;
        for (&(u, v), &(d, h)) in &self.prev.out {
            // prev (u -> v) in L_out(u)
            for (&(owner, pivot), &(d1, h1)) in &all.inn {
                if owner == u {
                    // rule 1: (pivot -> u) + (u -> v)
                    self.emit(&mut cand, pivot, v, d1 + d, h1 + h);
                }
            }
            for (&(owner, pivot), &(d2, h2)) in &all.out {
                if pivot == u {
                    // rule 2: (owner -> u) + (u -> v)
                    self.emit(&mut cand, owner, v, d2 + d, h2 + h);
                }
                if owner == v {
                    // rule 3: (u -> v) + (v -> pivot)
                    self.emit(&mut cand, u, pivot, d + d2, h + h2);
                }
            }
        }
        for (&(v, u), &(d, h)) in &self.prev.inn {
            // prev (u -> v) in L_in(v)
            for (&(owner, pivot), &(d4, h4)) in &all.out {
                if owner == v {
                    // rule 4: (u -> v) + (v -> pivot)
                    self.emit(&mut cand, u, pivot, d + d4, h + h4);
                }
            }
            for (&(owner, pivot), &(d5, h5)) in &all.inn {
                if pivot == v {
                    // rule 5: (u -> v) + (v -> owner)
                    self.emit(&mut cand, u, owner, d + d5, h + h5);
                }
                if owner == u {
                    // rule 6: (pivot -> u) + (u -> v)
                    self.emit(&mut cand, pivot, v, d5 + d, h5 + h);
                }
            }
        }
        let mut next = RefLabels::default();
        for (side_all, side_cand, side_next) in
            [(&mut self.all.out, cand.out, &mut next.out), (&mut self.all.inn, cand.inn, &mut next.inn)]
        {
            for (key, val) in side_cand {
                if side_all.get(&key).is_none_or(|old| val.0 < old.0) {
                    side_all.insert(key, val);
                    side_next.insert(key, val);
                }
            }
        }
        self.prev = next;
        !self.prev.out.is_empty() || !self.prev.inn.is_empty()
    }
}

/// Converts the labeler's state for comparison; undirected labels are
/// expanded into the out/in pair a symmetric directed graph would have.
fn snapshot(lab: &Labeler<'_>, directed: bool) -> RefLabels {
    let mut s = RefLabels::default();
    for (side, owner, e) in lab.state().all().iter() {
        if e.pivot == owner {
            continue;
        }
        let val = (e.dist, e.hops);
        match side {
            Side::Out => {
                s.out.insert((owner, e.pivot), val);
                if !directed {
                    s.inn.insert((owner, e.pivot), val);
                }
            }
            Side::In => {
                s.inn.insert((owner, e.pivot), val);
            }
        }
    }
    s
}

type Keyed = Vec<((u32, u32), u32)>;

fn dists(l: &RefLabels) -> (Keyed, Keyed) {
    (l.out.iter().map(|(&k, &(d, _))| (k, d)).collect(), l.inn.iter().map(|(&k, &(d, _))| (k, d)).collect())
}

/// Returns the number of rounds both generators ran.
fn compare(g: &Graph, r: &RankAssignment) -> Result<u32, String> {
    let mut arcs: Vec<_> = g.edges().collect();
    if !g.is_directed() {
        arcs.extend(g.edges().map(|(u, v, w)| (v, u, w)).collect::<Vec<_>>());
    }
    let mut reference = Reference::new(&arcs, r);
    let cfg = BuildConfig { prune: false, parallel: false, ..BuildConfig::default() };
    let mut lab = Labeler::new(g, r, cfg).unwrap();
    loop {
        let it = lab.state().iteration();
        let got = snapshot(&lab, g.is_directed());
        if dists(&got) != dists(&reference.all) {
            return Err(format!(
                "iteration {it}: simplified rules hold {} entries, six rules {}",
                got.len(),
                reference.all.len()
            ));
        }
        let more = reference.round();
        lab.step_with(StepMode::Doubling);
        if more == lab.is_converged() {
            return Err(format!("iteration {it}: convergence differs"));
        }
        if !more {
            return Ok(it + 1);
        }
    }
}

#[test]
fn six_rules_match_simplified_rules_each_round() {
    let mut longest = 0;
    for directed in [true, false] {
        for weighted in [false, true] {
            for seed in 0..40 {
                let g = random_graph(7 + seed as usize % 5, 0.3, Class { directed, weighted }, 900 + seed);
                let r = rank_by_degree(&g, RankStrategy::Degree);
                let rounds = compare(&g, &r)
                    .unwrap_or_else(|m| panic!("directed {directed} weighted {weighted} seed {seed}: {m}"));
                longest = longest.max(rounds);
            }
        }
    }
    assert!(longest >= 4, "corpus too shallow: {longest} rounds");
}

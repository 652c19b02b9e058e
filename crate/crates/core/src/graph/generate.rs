//! Synthetic graph generators.
//!
//! The power-law generator follows the generalized linear preference (GLP)
//! model: a ring of `m0` seed vertices grows one step at a time. With
//! probability `p` a step adds `m` links between existing vertices, otherwise
//! it adds a new vertex with `m` links. Endpoints are drawn with probability
//! proportional to `degree - beta`. A fractional `m` is realized as `floor(m)`
//! links plus one more with probability `m - floor(m)`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError, VertexId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlpParams {
    /// Mean number of links added per step.
    pub m: f64,
    /// Probability that a step links existing vertices instead of adding one.
    pub p: f64,
    /// Preference shift; must be below 1 so that every weight stays positive.
    pub beta: f64,
    /// Size of the seed ring.
    pub m0: usize,
}

impl Default for GlpParams {
    fn default() -> Self {
        GlpParams { m: 1.13, p: 0.4695, beta: 0.6447, m0: 10 }
    }
}

impl GlpParams {
    /// Parameters targeting an edge density `|E|/|V|` of roughly `density`.
    ///
    /// Each step adds `m` edges and a vertex with probability `1 - p`, so the
    /// density is about `m / (1 - p)`. `m` and `beta` keep their defaults and
    /// `p` absorbs the change; densities below `m` lower `m` instead.
    pub fn with_density(density: f64) -> GlpParams {
        let base = GlpParams::default();
        if density <= base.m {
            GlpParams { m: density.max(1.0), p: 0.0, ..base }
        } else {
            GlpParams { p: 1.0 - base.m / density, ..base }
        }
    }
}

/// Fenwick tree over non-negative f64 weights supporting weighted sampling.
struct WeightTree {
    tree: Vec<f64>,
    total: f64,
}

impl WeightTree {
    fn new(capacity: usize) -> Self {
        WeightTree { tree: vec![0.0; capacity + 1], total: 0.0 }
    }

    fn add(&mut self, idx: usize, delta: f64) {
        self.total += delta;
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum exceeds `target`.
    fn find(&self, mut target: f64, len: usize) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(len - 1)
    }
}

struct Growth {
    degree: Vec<u32>,
    weights: WeightTree,
    edges: HashSet<(VertexId, VertexId)>,
    order: Vec<(VertexId, VertexId)>,
    beta: f64,
}

impl Growth {
    fn add_vertex(&mut self) -> VertexId {
        let v = self.degree.len();
        self.degree.push(0);
        v as VertexId
    }

    fn link(&mut self, a: VertexId, b: VertexId) -> bool {
        let key = (a.min(b), a.max(b));
        if a == b || !self.edges.insert(key) {
            return false;
        }
        self.order.push(key);
        for v in [a, b] {
            // an isolated vertex has no weight until its first link
            let delta = if self.degree[v as usize] == 0 { 1.0 - self.beta } else { 1.0 };
            self.degree[v as usize] += 1;
            self.weights.add(v as usize, delta);
        }
        true
    }

    /// Draws an existing vertex, excluding any vertex `>= limit`.
    fn sample(&self, rng: &mut ChaCha8Rng, limit: usize) -> VertexId {
        let u: f64 = rng.gen::<f64>() * self.weights.total;
        self.weights.find(u, limit) as VertexId
    }
}

/// Grows an undirected unweighted GLP graph to `n` vertices.
pub fn generate_glp(n: usize, params: &GlpParams, seed: u64) -> Result<Graph, GraphError> {
    let GlpParams { m, p, beta, m0 } = *params;
    if m0 < 2 || n < m0 {
        return Err(GraphError::Validation(format!("GLP needs n >= m0 >= 2 (n = {n}, m0 = {m0})")));
    }
    if m.is_nan() || m < 1.0 || !(0.0..1.0).contains(&p) || beta.is_nan() || beta >= 1.0 {
        return Err(GraphError::Validation(format!("GLP parameters out of range: m = {m}, p = {p}, beta = {beta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Growth {
        degree: Vec::with_capacity(n),
        weights: WeightTree::new(n),
        edges: HashSet::new(),
        order: Vec::new(),
        beta,
    };
    for _ in 0..m0 {
        g.add_vertex();
    }
    for i in 0..m0 {
        g.link(i as VertexId, ((i + 1) % m0) as VertexId);
    }

    let whole = m.floor() as usize;
    let frac = m - m.floor();
    while g.degree.len() < n {
        let links = whole + usize::from(rng.gen::<f64>() < frac);
        let existing = g.degree.len();
        if rng.gen::<f64>() < p {
            for _ in 0..links {
                for _attempt in 0..32 {
                    let a = g.sample(&mut rng, existing);
                    let b = g.sample(&mut rng, existing);
                    if g.link(a, b) {
                        break;
                    }
                }
            }
        } else {
            // Draw targets before the new vertex enters the sampler.
            let mut targets: Vec<VertexId> = Vec::with_capacity(links);
            let wanted = links.min(existing);
            let mut attempts = 0;
            while targets.len() < wanted && attempts < 64 * wanted {
                attempts += 1;
                let t = g.sample(&mut rng, existing);
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            let v = g.add_vertex();
            for t in targets {
                g.link(v, t);
            }
        }
    }
    Graph::from_edges(n, false, false, g.order.into_iter().map(|(a, b)| (a, b, 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedShape {
    /// Vertex 0 joined to every other vertex.
    Star,
    Path,
    /// Falls back to a path below three vertices.
    Cycle,
    Clique,
}

pub fn generate_named(shape: NamedShape, n: usize) -> Graph {
    let n32 = n as VertexId;
    let edges: Vec<(VertexId, VertexId)> = match shape {
        NamedShape::Star => (1..n32).map(|v| (0, v)).collect(),
        NamedShape::Path => (1..n32).map(|v| (v - 1, v)).collect(),
        NamedShape::Cycle => {
            let mut e: Vec<_> = (1..n32).map(|v| (v - 1, v)).collect();
            if n >= 3 {
                e.push((n32 - 1, 0));
            }
            e
        }
        NamedShape::Clique => (0..n32).flat_map(|u| (u + 1..n32).map(move |v| (u, v))).collect(),
    };
    Graph::undirected(n, &edges)
}

//! Deterministic graph generators.
//!
//! Randomized families draw from `ChaCha8Rng::seed_from_u64(seed)`; the seed
//! fully determines the output. Erdős–Rényi graphs test the pairs `i < j` in
//! lexicographic order, one uniform draw per pair. Random regular graphs use
//! the pairing model: the `n*k` half-edges are shuffled (Fisher–Yates),
//! paired consecutively, and the draw is rejected if it produces a self-loop
//! or a repeated edge, for at most 10 000 attempts.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{boundary_of_mask, PairWeight, VertexSet, WeightedGraph};

pub const K_REGULAR_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasurePolicy {
    #[default]
    Unit,
    Normalizing,
}

impl MeasurePolicy {
    pub fn apply(self, g: WeightedGraph) -> Result<WeightedGraph> {
        match self {
            MeasurePolicy::Unit => Ok(g),
            MeasurePolicy::Normalizing => g.normalizing_measure(),
        }
    }
}

impl FromStr for MeasurePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(Self::Unit),
            "normalizing" => Ok(Self::Normalizing),
            _ => Err(Error::Invalid(format!("unknown measure policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Complete(usize),
    Path(usize),
    Cycle(usize),
    ErdosRenyi { n: usize, prob: f64, seed: u64 },
    KRegular { n: usize, k: usize, seed: u64 },
    TreeBall { k: usize, radius: usize },
    Pendant {
        n: usize,
        k: usize,
        seed: u64,
        w0_size: usize,
    },
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// `complete:N`, `path:N`, `cycle:N`, `er:N:PROB:SEED`,
    /// `kregular:N:K:SEED`, `tree:K:RADIUS`, `pendant:N:K:SEED:W0`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Invalid(format!("bad generator spec `{s}`"));
        let int = |i: usize| -> Result<usize> {
            parts.get(i).and_then(|t| t.parse().ok()).ok_or_else(bad)
        };
        let seed = |i: usize| -> Result<u64> {
            parts.get(i).and_then(|t| t.parse().ok()).ok_or_else(bad)
        };
        let arity = |k: usize| if parts.len() == k { Ok(()) } else { Err(bad()) };
        match parts[0] {
            "complete" => arity(2).and(Ok(Self::Complete(int(1)?))),
            "path" => arity(2).and(Ok(Self::Path(int(1)?))),
            "cycle" => arity(2).and(Ok(Self::Cycle(int(1)?))),
            "er" => {
                arity(4)?;
                let prob = parts[2].parse::<f64>().map_err(|_| bad())?;
                Ok(Self::ErdosRenyi {
                    n: int(1)?,
                    prob,
                    seed: seed(3)?,
                })
            }
            "kregular" => {
                arity(4)?;
                Ok(Self::KRegular {
                    n: int(1)?,
                    k: int(2)?,
                    seed: seed(3)?,
                })
            }
            "tree" => {
                arity(3)?;
                Ok(Self::TreeBall {
                    k: int(1)?,
                    radius: int(2)?,
                })
            }
            "pendant" => {
                arity(5)?;
                Ok(Self::Pendant {
                    n: int(1)?,
                    k: int(2)?,
                    seed: seed(3)?,
                    w0_size: int(4)?,
                })
            }
            _ => Err(bad()),
        }
    }
}

/// Output of [`generate`]; the optional fields are filled by the families
/// that define them.
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: WeightedGraph,
    /// Designated root (tree balls).
    pub root: Option<usize>,
    /// Vertices strictly inside the truncation radius (tree balls).
    pub interior: Option<VertexSet>,
    /// `W0` and the hub vertex `w` (pendant).
    pub w0: Option<VertexSet>,
    pub hub: Option<usize>,
}

pub fn generate(spec: &GeneratorSpec, policy: MeasurePolicy) -> Result<Generated> {
    let plain = |graph| Generated {
        graph,
        root: None,
        interior: None,
        w0: None,
        hub: None,
    };
    let out = match *spec {
        GeneratorSpec::Complete(n) => plain(complete(n)?),
        GeneratorSpec::Path(n) => plain(path(n)?),
        GeneratorSpec::Cycle(n) => plain(cycle(n)?),
        GeneratorSpec::ErdosRenyi { n, prob, seed } => plain(erdos_renyi(n, prob, seed)?),
        GeneratorSpec::KRegular { n, k, seed } => plain(k_regular(n, k, seed)?),
        GeneratorSpec::TreeBall { k, radius } => {
            let t = tree_ball(k, radius)?;
            Generated {
                interior: Some(t.interior()),
                root: Some(t.root),
                graph: t.graph,
                w0: None,
                hub: None,
            }
        }
        GeneratorSpec::Pendant { n, k, seed, w0_size } => {
            let e = pendant(&k_regular(n, k, seed)?, w0_size)?;
            Generated {
                graph: e.graph,
                root: None,
                interior: None,
                w0: Some(e.w0),
                hub: Some(e.hub),
            }
        }
    };
    Ok(Generated {
        graph: policy.apply(out.graph)?,
        ..out
    })
}

pub fn complete(n: usize) -> Result<WeightedGraph> {
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))
        .collect();
    WeightedGraph::from_edges(n, &edges)
}

pub fn path(n: usize) -> Result<WeightedGraph> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    WeightedGraph::from_edges(n, &edges)
}

pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InfeasibleGenerator(format!("cycle needs n >= 3, got {n}")));
    }
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    edges.push((n - 1, 0, 1.0));
    WeightedGraph::from_edges(n, &edges)
}

pub fn erdos_renyi(n: usize, prob: f64, seed: u64) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InfeasibleGenerator(format!("edge probability {prob}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < prob {
                edges.push((i, j, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges)
}

pub fn k_regular(n: usize, k: usize, seed: u64) -> Result<WeightedGraph> {
    if k >= n || (n * k) % 2 == 1 {
        return Err(Error::InfeasibleGenerator(format!(
            "no simple {k}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * k).map(|i| i / k).collect();
    'attempt: for _ in 0..K_REGULAR_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::with_capacity(n * k / 2);
        let mut edges = Vec::with_capacity(n * k / 2);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            edges.push((a, b, 1.0));
        }
        return WeightedGraph::from_edges(n, &edges);
    }
    Err(Error::InfeasibleGenerator(format!(
        "pairing model found no simple {k}-regular graph on {n} vertices in {K_REGULAR_ATTEMPTS} attempts"
    )))
}

/// Ball of radius `radius` around the root of the infinite `k`-regular tree.
#[derive(Debug, Clone)]
pub struct TreeBall {
    pub graph: WeightedGraph,
    pub root: usize,
    pub radius: usize,
    /// Distance of each vertex to the root.
    pub depth: Vec<usize>,
}

impl TreeBall {
    /// Vertices at depth `< radius`.
    pub fn interior(&self) -> VertexSet {
        if self.radius == 0 {
            return VertexSet::default();
        }
        self.ball(self.radius - 1)
    }

    /// Vertices at depth `<= r`.
    pub fn ball(&self, r: usize) -> VertexSet {
        VertexSet::new(
            self.depth
                .iter()
                .enumerate()
                .filter_map(|(x, &d)| (d <= r).then_some(x))
                .collect(),
        )
    }
}

pub fn tree_ball(k: usize, radius: usize) -> Result<TreeBall> {
    if k < 2 {
        return Err(Error::InfeasibleGenerator(format!("tree degree {k} < 2")));
    }
    let mut depth = vec![0usize];
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    for level in 1..=radius {
        let mut next = Vec::new();
        for &parent in &frontier {
            let children = if parent == 0 { k } else { k - 1 };
            for _ in 0..children {
                let c = depth.len();
                depth.push(level);
                edges.push((parent, c, 1.0));
                next.push(c);
            }
        }
        frontier = next;
    }
    let graph = WeightedGraph::from_edges(depth.len(), &edges)?;
    Ok(TreeBall {
        graph,
        root: 0,
        radius,
        depth,
    })
}

/// A `k`-regular base graph `b0` with a hub `w in W0` joined to every other
/// vertex of `W0`.
#[derive(Debug, Clone)]
pub struct Pendant {
    pub graph: WeightedGraph,
    pub base: WeightedGraph,
    pub w0: VertexSet,
    pub hub: usize,
}

/// Builds the hub construction on `base`.
///
/// `W0` is the set of size `w0_size` with the smallest boundary in `base`
/// (first in increasing bitmask order among ties) when `n <= 24`, and the
/// breadth-first ball of that size around vertex 0 otherwise. The hub is the
/// smallest index in `W0`.
pub fn pendant(base: &WeightedGraph, w0_size: usize) -> Result<Pendant> {
    let n = base.len();
    if w0_size == 0 || 2 * w0_size > n {
        return Err(Error::InfeasibleGenerator(format!(
            "W0 size {w0_size} must lie in [1, n/2] for n = {n}"
        )));
    }
    let w0 = if n <= 24 {
        min_boundary_set_of_size(base, w0_size)
    } else {
        bfs_prefix(base, w0_size)
    };
    let hub = w0.members()[0];
    let mut edges: Vec<_> = base.edges().iter().map(|e| (e.u, e.v, e.weight)).collect();
    for v in w0.iter().skip(1) {
        if base.weight(hub, v) == 0.0 {
            edges.push((hub, v, 1.0));
        }
    }
    let graph = WeightedGraph::new(base.ids().to_vec(), base.measure().to_vec(), edges)?;
    Ok(Pendant {
        graph,
        base: base.clone(),
        w0,
        hub,
    })
}

fn min_boundary_set_of_size(g: &WeightedGraph, size: usize) -> VertexSet {
    let n = g.len();
    let w = PairWeight::edge_weights(g);
    let mut best: Option<(f64, u64)> = None;
    let mut mask: u64 = (1u64 << size) - 1;
    let limit = 1u64 << n;
    let mut inside = vec![false; n];
    while mask < limit {
        for (x, slot) in inside.iter_mut().enumerate() {
            *slot = mask >> x & 1 == 1;
        }
        let value = boundary_of_mask(g, &w, &inside);
        if best.map_or(true, |(b, _)| value < b) {
            best = Some((value, mask));
        }
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    let (_, m) = best.expect("at least one subset");
    VertexSet::new((0..n).filter(|&x| m >> x & 1 == 1).collect())
}

fn bfs_prefix(g: &WeightedGraph, size: usize) -> VertexSet {
    let mut seen = vec![false; g.len()];
    let mut order = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..g.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for nb in g.neighbors(x) {
                if !seen[nb.vertex] {
                    seen[nb.vertex] = true;
                    queue.push_back(nb.vertex);
                }
            }
        }
    }
    order.truncate(size);
    VertexSet::new(order)
}

//! Edge lengths, the admissible classes `R_p(b, m)`, path metrics and balls.
//!
//! An [`EdgeLength`] `d` is admissible for `p > 1` when every vertex satisfies
//! `sum_y b(x, y) d(x, y)^(p/(p-1)) <= m(x)`, and for `p = 1` when `d <= 1` on
//! every edge. [`check_membership`] certifies this with the worst slack and
//! the vertex (or edge) attaining it.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_p_closed, check_p_open, Error, Result};
use crate::graph::{sorted_edge_ids, VertexSet, WeightedGraph};
use crate::numeric::ksum;

/// Relative slack tolerated by [`check_membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Conjugate exponent `q = p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// A symmetric nonnegative length per edge, aligned with
/// [`WeightedGraph::edges`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeLength {
    pub name: String,
    values: Vec<f64>,
}

impl EdgeLength {
    pub fn new(g: &WeightedGraph, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.edges().len() {
            return Err(Error::LengthMismatch {
                expected: g.edges().len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid("edge lengths must be finite and nonnegative".into()));
        }
        Ok(Self {
            name: name.into(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.values[edge]
    }

    /// `c * d`, for `c >= 0`.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            name: format!("{c}*{}", self.name),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// `d_p(x, y) = (Deg(x) v Deg(y))^(-(p-1)/p)` on every edge.
pub fn degree_metric(g: &WeightedGraph, p: f64) -> Result<EdgeLength> {
    check_p_open(p)?;
    let expo = -(p - 1.0) / p;
    let deg: Vec<f64> = (0..g.len()).map(|x| g.weight_sum(x) / g.measure()[x]).collect();
    let values = g
        .edges()
        .iter()
        .map(|e| deg[e.u].max(deg[e.v]).powf(expo))
        .collect();
    Ok(EdgeLength {
        name: "degree".into(),
        values,
    })
}

/// `d = c` on every edge.
pub fn constant_length(g: &WeightedGraph, c: f64) -> Result<EdgeLength> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Invalid(format!("constant length {c} must be >= 0")));
    }
    Ok(EdgeLength {
        name: format!("const:{c}"),
        values: vec![c; g.edges().len()],
    })
}

/// Minimal edge length `delta(d)`.
pub fn delta(g: &WeightedGraph, d: &EdgeLength) -> Result<f64> {
    if g.edges().is_empty() {
        return Err(Error::EdgelessGraph);
    }
    Ok(d.values().iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    Vertex { id: String },
    Edge { u: String, v: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipCertificate {
    pub p: f64,
    pub is_member: bool,
    pub worst_slack: f64,
    pub witness: Witness,
}

/// Certifies `d in R_p(b, m)`.
///
/// For `p > 1` the per-vertex slack is `m(x) - sum_y b d^(p/(p-1))`, and a
/// vertex passes when its slack is at least `-1e-12 * max(1, m(x))`. For
/// `p = 1` the per-edge slack is `1 - d(x, y)`.
pub fn check_membership(g: &WeightedGraph, d: &EdgeLength, p: f64) -> Result<MembershipCertificate> {
    check_p_closed(p)?;
    let mut worst = f64::INFINITY;
    let mut witness = Witness::None;
    let mut member = true;
    if p == 1.0 {
        for (k, e) in g.edges().iter().enumerate() {
            let slack = 1.0 - d.get(k);
            member &= slack >= -MEMBERSHIP_TOL;
            if slack < worst {
                worst = slack;
                witness = Witness::Edge {
                    u: g.id(e.u).into(),
                    v: g.id(e.v).into(),
                };
            }
        }
    } else {
        let q = conjugate(p);
        for x in 0..g.len() {
            let load = ksum(g.neighbors(x).iter().map(|nb| nb.weight * d.get(nb.edge).powf(q)));
            let m = g.measure()[x];
            let slack = m - load;
            member &= slack >= -MEMBERSHIP_TOL * m.max(1.0);
            if slack < worst {
                worst = slack;
                witness = Witness::Vertex { id: g.id(x).into() };
            }
        }
    }
    Ok(MembershipCertificate {
        p,
        is_member: member,
        worst_slack: worst,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths; unreachable vertices get `+inf`.
/// Ties in the queue are broken by vertex index.
pub fn shortest_distances(g: &WeightedGraph, d: &EdgeLength, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem {
        dist: 0.0,
        vertex: source,
    });
    while let Some(HeapItem { dist: du, vertex: u }) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for nb in g.neighbors(u) {
            let alt = du + d.get(nb.edge);
            if alt < dist[nb.vertex] {
                dist[nb.vertex] = alt;
                heap.push(HeapItem {
                    dist: alt,
                    vertex: nb.vertex,
                });
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Path {
        graph: Box<WeightedGraph>,
        lengths: EdgeLength,
    },
}

/// A pseudo metric on the vertices of a graph.
///
/// Disconnected pairs are at distance `f64::INFINITY`, which is never
/// produced by finite sums and so acts as an exact sentinel. Small metrics
/// are stored as a dense table; [`PseudoMetric::path`] instead keeps the graph
/// and computes rows on demand, for truncations too large to tabulate.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMetric {
    n: usize,
    storage: Storage,
}

impl PseudoMetric {
    /// Dense table in row-major order. Checks symmetry, zero diagonal and
    /// nonnegativity, but not the triangle inequality.
    pub fn from_table(n: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: table.len(),
            });
        }
        for x in 0..n {
            if table[x * n + x] != 0.0 {
                return Err(Error::Invalid("pseudo metric must vanish on the diagonal".into()));
            }
            for y in 0..n {
                let v = table[x * n + y];
                if v.is_nan() || v < 0.0 || v != table[y * n + x] {
                    return Err(Error::Invalid(
                        "pseudo metric must be symmetric and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(Self {
            n,
            storage: Storage::Dense(table),
        })
    }

    /// Lazily evaluated path metric of `d`.
    pub fn path(g: &WeightedGraph, d: &EdgeLength) -> Self {
        Self {
            n: g.len(),
            storage: Storage::Path {
                graph: Box::new(g.clone()),
                lengths: d.clone(),
            },
        }
    }

    /// Combinatorial graph distance (path metric of `d = 1`).
    pub fn combinatorial(g: &WeightedGraph) -> Self {
        let d = constant_length(g, 1.0).expect("1 is a valid length");
        Self::path(g, &d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distances from `o` to every vertex.
    pub fn row(&self, o: usize) -> Cow<'_, [f64]> {
        match &self.storage {
            Storage::Dense(t) => Cow::Borrowed(&t[o * self.n..(o + 1) * self.n]),
            Storage::Path { graph, lengths } => Cow::Owned(shortest_distances(graph, lengths, o)),
        }
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        match &self.storage {
            Storage::Dense(t) => t[x * self.n + y],
            Storage::Path { .. } => self.row(x)[y],
        }
    }

    /// Materializes all rows.
    pub fn to_dense(&self) -> Self {
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Path { graph, lengths } => path_metric_closure(graph, lengths),
        }
    }

    /// The metric evaluated on the edges of `g`.
    pub fn restrict_to_edges(&self, g: &WeightedGraph, name: impl Into<String>) -> EdgeLength {
        let values = g.edges().iter().map(|e| self.dist(e.u, e.v)).collect();
        EdgeLength {
            name: name.into(),
            values,
        }
    }

    /// First triple `(x, y, z)` with `d(x, z) > d(x, y) + d(y, z)` beyond a
    /// relative tolerance, if any.
    pub fn triangle_violation(&self, rel_tol: f64) -> Option<(usize, usize, usize)> {
        let dense = self.to_dense();
        let n = self.n;
        for x in 0..n {
            for y in 0..n {
                let dxy = dense.dist(x, y);
                for z in 0..n {
                    let via = dxy + dense.dist(y, z);
                    let direct = dense.dist(x, z);
                    if direct > via + rel_tol * via.abs().max(1.0) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }
}

/// Path metric of `d`: the infimum over paths of summed edge lengths.
/// Rows are computed in parallel and merged by source index.
pub fn path_metric_closure(g: &WeightedGraph, d: &EdgeLength) -> PseudoMetric {
    let n = g.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|o| shortest_distances(g, d, o))
        .collect();
    PseudoMetric {
        n,
        storage: Storage::Dense(rows.concat()),
    }
}

/// `B_r(o) = { x : dist(o, x) <= r }`.
pub fn distance_ball(pm: &PseudoMetric, o: usize, r: f64) -> Result<VertexSet> {
    if o >= pm.len() {
        return Err(Error::VertexOutOfRange(o));
    }
    if !(r >= 0.0) {
        return Err(Error::Invalid(format!("radius {r} must be >= 0")));
    }
    let row = pm.row(o);
    Ok(ball_from_row(&row, r))
}

pub(crate) fn ball_from_row(row: &[f64], r: f64) -> VertexSet {
    VertexSet::new(
        row.iter()
            .enumerate()
            .filter_map(|(x, &dx)| (dx <= r).then_some(x))
            .collect(),
    )
}

/// Parses `D <u> <v> <value>` lines; every edge of `g` must be given once.
pub fn parse_edge_lengths(g: &WeightedGraph, text: &str, name: &str) -> Result<EdgeLength> {
    let mut values = vec![None; g.edges().len()];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "D" {
            return Err(Error::Syntax {
                line,
                msg: "expected `D <u> <v> <value>`".into(),
            });
        }
        let lookup = |id: &str| {
            g.vertex(id).map_err(|_| Error::UndeclaredVertex {
                line,
                id: id.to_string(),
            })
        };
        let (a, b) = (lookup(toks[1])?, lookup(toks[2])?);
        let v: f64 = toks[3].parse().map_err(|_| Error::Syntax {
            line,
            msg: format!("invalid length `{}`", toks[3]),
        })?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Syntax {
                line,
                msg: format!("length {v} must be finite and >= 0"),
            });
        }
        let edge = g
            .neighbors(a)
            .iter()
            .find(|nb| nb.vertex == b)
            .map(|nb| nb.edge)
            .ok_or_else(|| Error::Syntax {
                line,
                msg: format!("`{}`-`{}` is not an edge", toks[1], toks[2]),
            })?;
        if values[edge].replace(v).is_some() {
            return Err(Error::DuplicateEdge {
                line,
                u: toks[1].into(),
                v: toks[2].into(),
            });
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or_else(|| {
                let e = g.edges()[k];
                Error::Invalid(format!(
                    "edge `{}`-`{}` has no length",
                    g.id(e.u),
                    g.id(e.v)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EdgeLength::new(g, name, values)
}

pub fn write_edge_lengths(g: &WeightedGraph, d: &EdgeLength) -> String {
    let mut out = String::new();
    for (a, b, v) in sorted_edge_ids(g, |k| d.get(k)) {
        let _ = writeln!(out, "D {a} {b} {v}");
    }
    out
}

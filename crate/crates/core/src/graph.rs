//! Weighted graphs `b` over `(X, m)`.
//!
//! A [`WeightedGraph`] is an immutable finite vertex set with a symmetric,
//! zero-diagonal edge weight `b` and a strictly positive vertex measure `m`.
//! Vertex ids are strings; internally every vertex is a dense index in
//! declaration order, and every neighbor list is sorted by index so that all
//! downstream sums iterate in a fixed order.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! V <id> [<measure>]
//! E <u> <v> <weight>
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::ksum;

/// An undirected edge `u < v` with weight `b(u, v) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Entry of a sorted neighbor list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub vertex: usize,
    pub weight: f64,
    /// Index into [`WeightedGraph::edges`].
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Neighbor>>,
    weight_sums: Vec<f64>,
}

impl WeightedGraph {
    /// Builds and validates a graph from ids, measures and an edge list.
    ///
    /// Edges may be given in either orientation; each unordered pair may
    /// appear at most once.
    pub fn new(
        ids: Vec<String>,
        measure: Vec<f64>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if ids.len() != measure.len() {
            return Err(Error::LengthMismatch {
                expected: ids.len(),
                got: measure.len(),
            });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex {
                    line: 0,
                    id: id.clone(),
                });
            }
        }
        for (i, &m) in measure.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::NonpositiveMeasure {
                    line: 0,
                    id: ids[i].clone(),
                    value: m,
                });
            }
        }
        let n = ids.len();
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= n {
                return Err(Error::VertexOutOfRange(a));
            }
            if b >= n {
                return Err(Error::VertexOutOfRange(b));
            }
            if a == b {
                return Err(Error::SelfLoop {
                    line: 0,
                    id: ids[a].clone(),
                });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonpositiveWeight {
                    line: 0,
                    u: ids[a].clone(),
                    v: ids[b].clone(),
                    value: w,
                });
            }
            list.push(Edge {
                u: a.min(b),
                v: a.max(b),
                weight: w,
            });
        }
        list.sort_by(|x, y| (x.u, x.v).cmp(&(y.u, y.v)));
        for pair in list.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::DuplicateEdge {
                    line: 0,
                    u: ids[pair[0].u].clone(),
                    v: ids[pair[0].v].clone(),
                });
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (k, e) in list.iter().enumerate() {
            adjacency[e.u].push(Neighbor {
                vertex: e.v,
                weight: e.weight,
                edge: k,
            });
            adjacency[e.v].push(Neighbor {
                vertex: e.u,
                weight: e.weight,
                edge: k,
            });
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|nb| nb.vertex);
        }
        let weight_sums = adjacency
            .iter()
            .map(|nbrs| ksum(nbrs.iter().map(|nb| nb.weight)))
            .collect();
        Ok(Self {
            ids,
            index,
            measure,
            edges: list,
            adjacency,
            weight_sums,
        })
    }

    /// Graph on vertices `"0".."n-1"` with unit measure.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(
            (0..n).map(|i| i.to_string()).collect(),
            vec![1.0; n],
            edges.iter().copied(),
        )
    }

    /// Copy with a new measure.
    pub fn with_measure(&self, measure: Vec<f64>) -> Result<Self> {
        Self::new(
            self.ids.clone(),
            measure,
            self.edges.iter().map(|e| (e.u, e.v, e.weight)),
        )
    }

    /// Copy with new edge weights, aligned with [`Self::edges`].
    pub fn with_edge_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::LengthMismatch {
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        Self::new(
            self.ids.clone(),
            self.measure.clone(),
            self.edges
                .iter()
                .zip(weights)
                .map(|(e, &w)| (e.u, e.v, w)),
        )
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[Neighbor] {
        &self.adjacency[x]
    }

    /// `sum_y b(x, y)`.
    pub fn weight_sum(&self, x: usize) -> f64 {
        self.weight_sums[x]
    }

    /// Edge weight `b(x, y)`; zero for non-adjacent pairs and on the diagonal.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adjacency[x]
            .binary_search_by_key(&y, |nb| nb.vertex)
            .map(|k| self.adjacency[x][k].weight)
            .unwrap_or(0.0)
    }

    pub fn total_measure(&self) -> f64 {
        ksum(self.measure.iter().copied())
    }

    pub fn measure_of(&self, set: &VertexSet) -> f64 {
        ksum(set.iter().map(|x| self.measure[x]))
    }

    /// Weighted degree `Deg(x) = (1/m(x)) sum_y b(x, y)`.
    pub fn weighted_degree(&self, x: usize) -> Result<f64> {
        if x >= self.len() {
            return Err(Error::VertexOutOfRange(x));
        }
        Ok(self.weight_sums[x] / self.measure[x])
    }

    /// Largest weighted degree, 0 for the empty graph.
    pub fn max_weighted_degree(&self) -> f64 {
        (0..self.len())
            .map(|x| self.weight_sums[x] / self.measure[x])
            .fold(0.0, f64::max)
    }

    /// Largest number of neighbors.
    pub fn max_combinatorial_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when every edge weight is exactly 1.
    pub fn has_unit_weights(&self) -> bool {
        self.edges.iter().all(|e| e.weight == 1.0)
    }

    /// Copy whose measure is the normalizing measure `m(x) = sum_y b(x, y)`.
    pub fn normalizing_measure(&self) -> Result<Self> {
        if let Some(x) = (0..self.len()).find(|&x| self.adjacency[x].is_empty()) {
            return Err(Error::IsolatedVertex(self.ids[x].clone()));
        }
        self.with_measure(self.weight_sums.clone())
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            label[start] = c;
            while let Some(x) = stack.pop() {
                members.push(x);
                for nb in &self.adjacency[x] {
                    if label[nb.vertex] == usize::MAX {
                        label[nb.vertex] = c;
                        stack.push(nb.vertex);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.len() <= 1 || self.components().len() == 1
    }

    /// Subgraph induced on `keep` (in the given order), measures carried over.
    pub fn induced(&self, keep: &VertexSet) -> Result<Self> {
        let mut pos = vec![usize::MAX; self.len()];
        for (i, x) in keep.iter().enumerate() {
            pos[x] = i;
        }
        let ids = keep.iter().map(|x| self.ids[x].clone()).collect();
        let measure = keep.iter().map(|x| self.measure[x]).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| pos[e.u] != usize::MAX && pos[e.v] != usize::MAX)
            .map(|e| (pos[e.u], pos[e.v], e.weight))
            .collect::<Vec<_>>();
        Self::new(ids, measure, edges)
    }
}

/// A subset of the vertices of one graph, stored as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    /// Like [`VertexSet::new`] but checks membership in `g`.
    pub fn in_graph(g: &WeightedGraph, members: Vec<usize>) -> Result<Self> {
        if let Some(&x) = members.iter().find(|&&x| x >= g.len()) {
            return Err(Error::VertexOutOfRange(x));
        }
        Ok(Self::new(members))
    }

    pub fn from_ids<S: AsRef<str>>(g: &WeightedGraph, ids: &[S]) -> Result<Self> {
        ids.iter()
            .map(|id| g.vertex(id.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn full(n: usize) -> Self {
        Self {
            members: (0..n).collect(),
        }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            members: mask
                .iter()
                .enumerate()
                .filter_map(|(i, &b)| b.then_some(i))
                .collect(),
        }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &x in &self.members {
            m[x] = true;
        }
        m
    }

    pub fn complement(&self, n: usize) -> Self {
        let mask = self.mask(n);
        Self {
            members: (0..n).filter(|&x| !mask[x]).collect(),
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    pub fn ids<'g>(&self, g: &'g WeightedGraph) -> Vec<&'g str> {
        self.members.iter().map(|&x| g.id(x)).collect()
    }
}

/// A symmetric nonnegative pair weight supported on the edges of a graph,
/// stored per edge in the order of [`WeightedGraph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairWeight {
    pub name: String,
    values: Vec<f64>,
}

impl PairWeight {
    pub fn new(g: &WeightedGraph, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.edges().len() {
            return Err(Error::LengthMismatch {
                expected: g.edges().len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid("pair weights must be finite and nonnegative".into()));
        }
        Ok(Self {
            name: name.into(),
            values,
        })
    }

    /// `w = b`.
    pub fn edge_weights(g: &WeightedGraph) -> Self {
        Self {
            name: "b".into(),
            values: g.edges().iter().map(|e| e.weight).collect(),
        }
    }

    /// `w = b * d` for an edge length `d`.
    pub fn scaled(g: &WeightedGraph, d: &crate::metrics::EdgeLength) -> Self {
        Self {
            name: format!("b*{}", d.name),
            values: g
                .edges()
                .iter()
                .zip(d.values())
                .map(|(e, &l)| e.weight * l)
                .collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.values[edge]
    }

    /// Pointwise sum of two weights on the same graph.
    pub fn sum(&self, other: &PairWeight) -> PairWeight {
        PairWeight {
            name: format!("{}+{}", self.name, other.name),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMeasureResult {
    pub set: VertexSet,
    pub weight_name: String,
    pub value: f64,
}

/// Sum of `w(x, y)` over edges with exactly one endpoint in the set mask.
pub(crate) fn boundary_of_mask(g: &WeightedGraph, w: &PairWeight, inside: &[bool]) -> f64 {
    ksum(
        g.edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| inside[e.u] != inside[e.v])
            .map(|(k, _)| w.get(k)),
    )
}

/// `|dW|_w`: sum of `w(x, y)` over ordered pairs in `W x (X \ W)`.
pub fn boundary_measure(
    g: &WeightedGraph,
    set: &VertexSet,
    w: &PairWeight,
) -> Result<BoundaryMeasureResult> {
    if let Some(x) = set.iter().find(|&x| x >= g.len()) {
        return Err(Error::VertexOutOfRange(x));
    }
    let value = boundary_of_mask(g, w, &set.mask(g.len()));
    Ok(BoundaryMeasureResult {
        set: set.clone(),
        weight_name: w.name.clone(),
        value,
    })
}

fn parse_number(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| Error::Syntax {
            line,
            msg: format!("invalid {what} `{tok}`"),
        })
}

/// Parses the line-oriented graph format.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut measure = Vec::new();
    let mut edges = Vec::new();
    let mut seen = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks[0] {
            "V" => {
                if !(2..=3).contains(&toks.len()) {
                    return Err(Error::Syntax {
                        line,
                        msg: "expected `V <id> [<measure>]`".into(),
                    });
                }
                let id = toks[1].to_string();
                let m = match toks.get(2) {
                    Some(t) => parse_number(t, line, "measure")?,
                    None => 1.0,
                };
                if index.contains_key(&id) {
                    return Err(Error::DuplicateVertex { line, id });
                }
                if !(m.is_finite() && m > 0.0) {
                    return Err(Error::NonpositiveMeasure { line, id, value: m });
                }
                index.insert(id.clone(), ids.len());
                ids.push(id);
                measure.push(m);
            }
            "E" => {
                if toks.len() != 4 {
                    return Err(Error::Syntax {
                        line,
                        msg: "expected `E <u> <v> <weight>`".into(),
                    });
                }
                let lookup = |id: &str| {
                    index.get(id).copied().ok_or_else(|| Error::UndeclaredVertex {
                        line,
                        id: id.to_string(),
                    })
                };
                let a = lookup(toks[1])?;
                let b = lookup(toks[2])?;
                let w = parse_number(toks[3], line, "weight")?;
                if a == b {
                    return Err(Error::SelfLoop {
                        line,
                        id: toks[1].to_string(),
                    });
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::NonpositiveWeight {
                        line,
                        u: toks[1].to_string(),
                        v: toks[2].to_string(),
                        value: w,
                    });
                }
                if seen.insert((a.min(b), a.max(b)), line).is_some() {
                    return Err(Error::DuplicateEdge {
                        line,
                        u: toks[1].to_string(),
                        v: toks[2].to_string(),
                    });
                }
                edges.push((a, b, w));
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    msg: format!("unknown record type `{other}`"),
                })
            }
        }
    }
    WeightedGraph::new(ids, measure, edges)
}

/// Writes `g` in the graph format: vertices sorted by id, then edges sorted
/// lexicographically by their (smaller id, larger id) pair.
pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
    for x in order {
        let _ = writeln!(out, "V {} {}", g.id(x), g.measure()[x]);
    }
    for (a, b, w) in sorted_edge_ids(g, |k| g.edges()[k].weight) {
        let _ = writeln!(out, "E {a} {b} {w}");
    }
    out
}

/// Edges as `(smaller id, larger id, value)` in lexicographic order.
pub(crate) fn sorted_edge_ids<'g>(
    g: &'g WeightedGraph,
    value: impl Fn(usize) -> f64,
) -> Vec<(&'g str, &'g str, f64)> {
    let mut rows: Vec<_> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (a, b) = (g.id(e.u), g.id(e.v));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            (a, b, value(k))
        })
        .collect();
    rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> WeightedGraph {
        parse_graph("V a 1\nV b 1\nE a b 1").unwrap()
    }

    fn path3() -> WeightedGraph {
        parse_graph("V a\nV b\nV c\nE a b 1\nE b c 1\n").unwrap()
    }

    #[test]
    fn parses_smallest_file() {
        let g = k2();
        assert_eq!(g.len(), 2);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
        assert_eq!(g.weight(0, 0), 0.0);
        assert_eq!(g.measure(), &[1.0, 1.0]);
    }

    #[test]
    fn rejects_invalid_files() {
        assert!(matches!(
            parse_graph("V a 1\nV b 1\nE a b -1"),
            Err(Error::NonpositiveWeight { line: 3, .. })
        ));
        assert!(matches!(
            parse_graph("V a 0\n"),
            Err(Error::NonpositiveMeasure { line: 1, .. })
        ));
        assert!(matches!(
            parse_graph("V a\nV a\n"),
            Err(Error::DuplicateVertex { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("V a\nV b\nE a b 1\nE b a 2\n"),
            Err(Error::DuplicateEdge { line: 4, .. })
        ));
        assert!(matches!(
            parse_graph("V a\nE a b 1\n"),
            Err(Error::UndeclaredVertex { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("# hi\nX a\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("V a\nV b\nE a b x\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn weighted_degree_examples() {
        assert_eq!(k2().weighted_degree(0).unwrap(), 1.0);
        let star = WeightedGraph::from_edges(
            5,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
        )
        .unwrap();
        assert_eq!(star.weighted_degree(0).unwrap(), 4.0);
        let g = parse_graph("V a 2\nV b 1\nE a b 1").unwrap();
        assert_eq!(g.weighted_degree(0).unwrap(), 0.5);
        assert!(g.weighted_degree(5).is_err());
        let iso = parse_graph("V a\n").unwrap();
        assert_eq!(iso.weighted_degree(0).unwrap(), 0.0);
    }

    #[test]
    fn normalizing_measure_examples() {
        let g = k2().normalizing_measure().unwrap();
        assert_eq!(g.measure(), &[1.0, 1.0]);
        let p = path3().normalizing_measure().unwrap();
        assert_eq!(p.measure(), &[1.0, 2.0, 1.0]);
        for x in 0..3 {
            assert_eq!(p.weighted_degree(x).unwrap(), 1.0);
        }
        let iso = parse_graph("V a\nV b\nV c\nE a b 1\n").unwrap();
        assert!(matches!(iso.normalizing_measure(), Err(Error::IsolatedVertex(id)) if id == "c"));
    }

    #[test]
    fn boundary_measure_examples() {
        let g = k2();
        let b = PairWeight::edge_weights(&g);
        let a = VertexSet::new(vec![0]);
        assert_eq!(boundary_measure(&g, &a, &b).unwrap().value, 1.0);
        assert_eq!(
            boundary_measure(&g, &VertexSet::full(2), &b).unwrap().value,
            0.0
        );
        let p = path3();
        let mid = VertexSet::from_ids(&p, &["b"]).unwrap();
        assert_eq!(
            boundary_measure(&p, &mid, &PairWeight::edge_weights(&p))
                .unwrap()
                .value,
            2.0
        );
        assert!(boundary_measure(&p, &VertexSet::new(vec![7]), &b).is_err());
    }

    #[test]
    fn writer_is_sorted_and_round_trips() {
        let g = parse_graph("V z 2\nV a\nV m 0.5\nE z a 3\nE m z 1\n").unwrap();
        let text = write_graph(&g);
        assert_eq!(text, "V a 1\nV m 0.5\nV z 2\nE a z 3\nE m z 1\n");
        let h = parse_graph(&text).unwrap();
        assert_eq!(write_graph(&h), text);
    }

    #[test]
    fn components_and_induced() {
        let g = parse_graph("V a\nV b\nV c\nV d\nE a b 1\nE c d 2\n").unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
        assert!(!g.is_connected());
        let sub = g.induced(&VertexSet::new(vec![2, 3])).unwrap();
        assert_eq!(sub.ids(), &["c".to_string(), "d".to_string()]);
        assert_eq!(sub.weight(0, 1), 2.0);
    }
}

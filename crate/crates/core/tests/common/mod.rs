#![allow(dead_code)]

use std::ops::RangeInclusive;

use proptest::prelude::*;
use proptest::sample::Index;

use pcheeger::energy::VertexFunction;
use pcheeger::WeightedGraph;

/// Random spanning tree plus extra edges of probability `density`, with
/// optional random weights in `[0.2, 3]` and measures in `[0.3, 3]`.
pub fn connected_graph(n: RangeInclusive<usize>, density: f64) -> impl Strategy<Value = WeightedGraph> {
    n.prop_flat_map(move |n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(any::<Index>(), n),
            prop::collection::vec(prop::bool::weighted(density), pairs),
            prop::collection::vec(0.2f64..3.0, pairs),
            prop::collection::vec(0.3f64..3.0, n),
            any::<bool>(),
            any::<bool>(),
        )
            .prop_map(move |(parents, extra, weights, measure, weighted, measured)| {
                let mut adj = vec![vec![false; n]; n];
                for i in 1..n {
                    let j = parents[i].index(i);
                    adj[i][j] = true;
                    adj[j][i] = true;
                }
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if adj[i][j] || extra[k] {
                            edges.push((i, j, if weighted { weights[k] } else { 1.0 }));
                        }
                        k += 1;
                    }
                }
                let g = WeightedGraph::from_edges(n, &edges).unwrap();
                if measured {
                    g.with_measure(measure).unwrap()
                } else {
                    g
                }
            })
    })
}

/// Graph with unit weights and unit measure.
pub fn unit_graph(n: RangeInclusive<usize>, density: f64) -> impl Strategy<Value = WeightedGraph> {
    connected_graph(n, density).prop_map(|g| {
        let ones = vec![1.0; g.edges().len()];
        let g = g.with_edge_weights(&ones).unwrap();
        let n = g.len();
        g.with_measure(vec![1.0; n]).unwrap()
    })
}

/// A graph together with a function on its vertices.
pub fn graph_and_function(
    n: RangeInclusive<usize>,
    values: std::ops::Range<f64>,
) -> impl Strategy<Value = (WeightedGraph, VertexFunction)> {
    connected_graph(n, 0.4).prop_flat_map(move |g| {
        let len = g.len();
        (
            Just(g),
            prop::collection::vec(values.clone(), len).prop_map(|v| VertexFunction::new(v).unwrap()),
        )
    })
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

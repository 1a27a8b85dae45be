//! Bipartitions from the sign pattern of a `lambda^(1)_p` minimizer.

use serde::Serialize;

use crate::cheeger::{sweep_cut, CheegerVariant, IsoperimetricResult, SweepLevels};
use crate::eigensolver::{solve_gap_all, EigenResult, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{boundary_of_mask, PairWeight, VertexSet, WeightedGraph};
use crate::metrics::EdgeLength;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub p: f64,
    pub lambda_estimate: f64,
    pub converged: bool,
    /// `{f > 0}` of the centered minimizer.
    pub positive: VertexSet,
    /// `{f <= 0}`.
    pub nonpositive: VertexSet,
    /// `|dW|_{bd} / min(m(W), m(X \ W))` for the sign cut.
    pub sign_cut_ratio: f64,
    /// Best level set of the minimizer.
    pub sweep: IsoperimetricResult,
    /// The sweep witness and its complement.
    pub parts: [VertexSet; 2],
    /// Set when the graph is disconnected and the parts are components.
    pub disconnected: bool,
}

/// Relative window around the best quotient inside which starts count as
/// equally good minimizers.
const TIE_WINDOW: f64 = 1e-9;

/// Sign cut and sweep refinement of the gap minimizer, measured with `d`.
///
/// When several starts reach the same quotient (a degenerate eigenvalue),
/// each of their minimizers is swept and the lowest ratio wins, earliest
/// start on ties. A disconnected graph is split into its first component
/// and the rest.
pub fn partition(g: &WeightedGraph, p: f64, d: &EdgeLength, cfg: &SolverConfig) -> Result<Partition> {
    let runs = solve_gap_all(g, p, cfg)?;
    let best = runs.iter().map(|r| r.lambda_estimate).fold(f64::INFINITY, f64::min);
    let window = best + TIE_WINDOW * best.abs().max(1e-300);
    let mut chosen: Option<(&EigenResult, IsoperimetricResult)> = None;
    for r in runs.iter().filter(|r| r.lambda_estimate <= window) {
        let sweep = match sweep_cut(g, d, &r.minimizer, &CheegerVariant::H1, SweepLevels::Values) {
            Err(Error::ConstantFunction | Error::NoAdmissibleSet) => continue,
            other => other?,
        };
        let better = match &chosen {
            None => true,
            Some((_, s)) => sweep.constant < s.constant - 1e-12 * s.constant.abs().max(1.0),
        };
        if better {
            chosen = Some((r, sweep));
        }
    }
    let (est, sweep) = chosen.ok_or(Error::NoAdmissibleSet)?;
    let n = g.len();
    let f = &est.minimizer;
    let positive = VertexSet::new((0..n).filter(|&x| f[x] > 0.0).collect());
    let nonpositive = positive.complement(n);
    let w = PairWeight::scaled(g, d);
    let cut = boundary_of_mask(g, &w, &positive.mask(n));
    let sign_cut_ratio = cut / g.measure_of(&positive).min(g.measure_of(&nonpositive));
    let components = g.components();
    let disconnected = components.len() > 1;
    let parts = if disconnected {
        let first = VertexSet::new(components[0].clone());
        let rest = first.complement(n);
        [first, rest]
    } else {
        [sweep.witness.clone(), sweep.witness.complement(n)]
    };
    Ok(Partition {
        p,
        lambda_estimate: est.lambda_estimate,
        converged: est.converged,
        positive,
        nonpositive,
        sign_cut_ratio,
        sweep,
        parts,
        disconnected,
    })
}

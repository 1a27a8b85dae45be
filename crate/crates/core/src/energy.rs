//! The p-Dirichlet energy, the discrete p-Laplacian and Rayleigh quotients.
//!
//! ```text
//! E_p(f)    = 1/2 sum_{x,y} b(x,y) |f(x) - f(y)|^p
//! L_p f(x)  = 1/m(x) sum_y b(x,y) |f(x) - f(y)|^(p-2) (f(x) - f(y))
//! E_p'(f)g  = 1/2 sum_{x,y} b(x,y) |f(x) - f(y)|^(p-2) (f(x) - f(y)) (g(x) - g(y))
//! ```
//!
//! `E_p'(f)g` is the weak-form pairing `<L_p f, g>_m`. The directional
//! derivative of `E_p` at `f` in direction `g` is `p * E_p'(f)g`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{check_p_closed, check_p_open, Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::numeric::{ksum, signed_pow, KahanSum};

/// A real value per vertex of a fixed graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("vertex function values must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    /// `1_W`.
    pub fn indicator(n: usize, set: &VertexSet) -> Self {
        let mut v = vec![0.0; n];
        for x in set.iter() {
            v[x] = 1.0;
        }
        Self(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| op(v)).collect())
    }

    /// Positive part `f v 0`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl std::ops::Index<usize> for VertexFunction {
    type Output = f64;
    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

pub(crate) fn check_len(g: &WeightedGraph, f: &VertexFunction) -> Result<()> {
    if f.len() == g.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: g.len(),
            got: f.len(),
        })
    }
}

/// `E_p(f)`, each undirected edge counted once with full weight.
pub fn energy(g: &WeightedGraph, f: &VertexFunction, p: f64) -> Result<f64> {
    check_p_closed(p)?;
    check_len(g, f)?;
    Ok(energy_unchecked(g, f.values(), p))
}

pub(crate) fn energy_unchecked(g: &WeightedGraph, f: &[f64], p: f64) -> f64 {
    ksum(
        g.edges()
            .iter()
            .map(|e| e.weight * (f[e.u] - f[e.v]).abs().powf(p)),
    )
}

/// `sum_y b(x,y) |f(x)-f(y)|^(p-2) (f(x)-f(y))` per vertex, i.e. `m * L_p f`.
pub(crate) fn flux(g: &WeightedGraph, f: &[f64], p: f64) -> Vec<f64> {
    let mut acc = vec![KahanSum::new(); g.len()];
    for e in g.edges() {
        let t = e.weight * signed_pow(f[e.u] - f[e.v], p - 1.0);
        acc[e.u].add(t);
        acc[e.v].add(-t);
    }
    acc.iter().map(KahanSum::value).collect()
}

/// `L_p f`.
pub fn p_laplacian_apply(g: &WeightedGraph, f: &VertexFunction, p: f64) -> Result<VertexFunction> {
    check_p_open(p)?;
    check_len(g, f)?;
    let fl = flux(g, f.values(), p);
    Ok(VertexFunction(
        fl.iter().zip(g.measure()).map(|(a, m)| a / m).collect(),
    ))
}

/// `E_p'(f)dir`, the weak-form pairing `<L_p f, dir>_m`.
pub fn energy_derivative(
    g: &WeightedGraph,
    f: &VertexFunction,
    dir: &VertexFunction,
    p: f64,
) -> Result<f64> {
    check_p_open(p)?;
    check_len(g, f)?;
    check_len(g, dir)?;
    let (f, h) = (f.values(), dir.values());
    Ok(ksum(g.edges().iter().map(|e| {
        e.weight * signed_pow(f[e.u] - f[e.v], p - 1.0) * (h[e.u] - h[e.v])
    })))
}

/// `sum_x m(x) |f(x) - shift|^p`.
pub(crate) fn shifted_norm_pow(g: &WeightedGraph, f: &[f64], p: f64, shift: f64) -> f64 {
    ksum(
        f.iter()
            .zip(g.measure())
            .map(|(v, m)| m * (v - shift).abs().powf(p)),
    )
}

/// The shift `gamma*` minimizing `sum_x m(x) |f(x) - gamma|^p`.
///
/// `p = 2` gives the weighted mean and `p = 1` the smallest weighted median.
/// Otherwise the root of the increasing map
/// `gamma -> sum m |gamma - f|^(p-2) (gamma - f)` is bracketed in
/// `[min f, max f]` and bisected to `1e-12 * (max f - min f)`.
pub fn p_mean_shift(g: &WeightedGraph, f: &VertexFunction, p: f64) -> Result<f64> {
    check_p_closed(p)?;
    check_len(g, f)?;
    Ok(p_mean_shift_unchecked(g.measure(), f.values(), p))
}

pub(crate) fn p_mean_shift_unchecked(m: &[f64], f: &[f64], p: f64) -> f64 {
    let lo0 = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi0 = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if f.is_empty() {
        return 0.0;
    }
    if lo0 == hi0 {
        return lo0;
    }
    if p == 2.0 {
        let mass = ksum(m.iter().copied());
        return ksum(f.iter().zip(m).map(|(v, w)| v * w)) / mass;
    }
    if p == 1.0 {
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
        let half = ksum(m.iter().copied()) / 2.0;
        let mut acc = KahanSum::new();
        for &x in &order {
            acc.add(m[x]);
            if acc.value() >= half {
                return f[x];
            }
        }
        return hi0;
    }
    let slope = |gamma: f64| ksum(f.iter().zip(m).map(|(v, w)| w * signed_pow(gamma - v, p - 1.0)));
    let (mut lo, mut hi) = (lo0, hi0);
    let tol = 1e-12 * (hi0 - lo0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientVariant {
    /// `E_p(f) / ||f||^p`, the quotient behind `lambda^(0)_p`.
    Ground,
    /// `E_p(f) / inf_gamma ||f - gamma||^p`, behind `lambda^(1)_p`.
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientValue {
    pub energy: f64,
    /// `||f - shift||_{m,p}`.
    pub norm: f64,
    pub shift: f64,
    pub quotient: f64,
}

pub fn rayleigh(
    g: &WeightedGraph,
    f: &VertexFunction,
    p: f64,
    variant: QuotientVariant,
) -> Result<QuotientValue> {
    check_p_closed(p)?;
    check_len(g, f)?;
    let shift = match variant {
        QuotientVariant::Ground => {
            if f.values().iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroFunction);
            }
            0.0
        }
        QuotientVariant::Gap => {
            if f.is_constant() {
                return Err(Error::ConstantFunction);
            }
            p_mean_shift_unchecked(g.measure(), f.values(), p)
        }
    };
    let energy = energy_unchecked(g, f.values(), p);
    let denom = shifted_norm_pow(g, f.values(), p, shift);
    Ok(QuotientValue {
        energy,
        norm: denom.powf(1.0 / p),
        shift,
        quotient: energy / denom,
    })
}

/// `max_x m(x) |L_p f(x) - lambda |f(x)|^(p-2) f(x)|`; zero exactly on weak
/// solutions for `lambda`.
pub fn weak_solution_residual(
    g: &WeightedGraph,
    f: &VertexFunction,
    lambda: f64,
    p: f64,
) -> Result<f64> {
    check_p_open(p)?;
    check_len(g, f)?;
    Ok(residual_unchecked(g, f.values(), lambda, p))
}

pub(crate) fn residual_unchecked(g: &WeightedGraph, f: &[f64], lambda: f64, p: f64) -> f64 {
    flux(g, f, p)
        .iter()
        .zip(f)
        .zip(g.measure())
        .map(|((fl, v), m)| (fl - lambda * m * signed_pow(*v, p - 1.0)).abs())
        .fold(0.0, f64::max)
}

/// Parses `F <vertex> <value>` lines; every vertex must be given once.
pub fn parse_function(g: &WeightedGraph, text: &str) -> Result<VertexFunction> {
    let mut values = vec![None; g.len()];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "F" {
            return Err(Error::Syntax {
                line,
                msg: "expected `F <vertex> <value>`".into(),
            });
        }
        let x = g.vertex(toks[1]).map_err(|_| Error::UndeclaredVertex {
            line,
            id: toks[1].into(),
        })?;
        let v: f64 = toks[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::Syntax {
                line,
                msg: format!("invalid value `{}`", toks[2]),
            })?;
        if values[x].replace(v).is_some() {
            return Err(Error::Syntax {
                line,
                msg: format!("vertex `{}` given twice", toks[1]),
            });
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(x, v)| v.ok_or_else(|| Error::Invalid(format!("no value for vertex `{}`", g.id(x)))))
        .collect::<Result<Vec<_>>>()?;
    VertexFunction::new(values)
}

pub fn write_function(g: &WeightedGraph, f: &VertexFunction) -> String {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g.id(a).cmp(g.id(b)));
    let mut out = String::new();
    for x in order {
        let _ = writeln!(out, "F {} {}", g.id(x), f[x]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{boundary_measure, PairWeight};
    use crate::generators::{complete, path};

    fn vf(v: &[f64]) -> VertexFunction {
        VertexFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn energy_examples() {
        let k2 = complete(2).unwrap();
        assert_eq!(energy(&k2, &vf(&[0.0, 1.0]), 2.0).unwrap(), 1.0);
        assert_eq!(energy(&k2, &vf(&[3.0, 3.0]), 1.5).unwrap(), 0.0);
        let g = WeightedGraph::from_edges(2, &[(0, 1, 3.0)]).unwrap();
        assert_eq!(energy(&g, &vf(&[0.0, 2.0]), 3.0).unwrap(), 24.0);
        assert!(energy(&g, &vf(&[0.0]), 2.0).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let k2 = complete(2).unwrap();
        let f = vf(&[0.0, 1.0]);
        assert_eq!(p_laplacian_apply(&k2, &f, 2.0).unwrap().values(), &[-1.0, 1.0]);
        assert_eq!(p_laplacian_apply(&k2, &f, 3.0).unwrap().values(), &[-1.0, 1.0]);
        let c = p_laplacian_apply(&path(4).unwrap(), &vf(&[2.0; 4]), 1.3).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_case_matches_laplacian_matrix() {
        let g = crate::generators::erdos_renyi(8, 0.5, 4)
            .unwrap()
            .with_measure(vec![1.0, 2.0, 0.5, 1.5, 1.0, 3.0, 0.7, 1.1])
            .unwrap();
        let f = vf(&[0.3, -1.0, 2.0, 0.1, 0.0, 5.0, -2.0, 1.0]);
        let l = p_laplacian_apply(&g, &f, 2.0).unwrap();
        for x in 0..8 {
            let direct: f64 = g.weight_sum(x) * f[x]
                - (0..8).map(|y| g.weight(x, y) * f[y]).sum::<f64>();
            assert!((l[x] - direct / g.measure()[x]).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_examples() {
        let k2 = complete(2).unwrap();
        let f = vf(&[0.0, 1.0]);
        // The weak-form pairing at dir = f equals E_p(f).
        assert_eq!(energy_derivative(&k2, &f, &f, 2.0).unwrap(), 1.0);
        assert_eq!(energy_derivative(&k2, &f, &vf(&[4.0, 4.0]), 2.0).unwrap(), 0.0);
        assert_eq!(energy_derivative(&k2, &f, &vf(&[1.0, 0.0]), 2.0).unwrap(), -1.0);
        // Finite differences of E_2 recover p times the pairing.
        let h = 1e-6;
        let plus = energy(&k2, &vf(&[h, 1.0]), 2.0).unwrap();
        let minus = energy(&k2, &vf(&[-h, 1.0]), 2.0).unwrap();
        assert!(((plus - minus) / (2.0 * h) - 2.0 * -1.0).abs() < 1e-8);
    }

    #[test]
    fn shift_examples() {
        let k2 = complete(2).unwrap();
        assert_eq!(p_mean_shift(&k2, &vf(&[0.0, 2.0]), 2.0).unwrap(), 1.0);
        assert_eq!(p_mean_shift(&k2, &vf(&[0.7, 0.7]), 3.3).unwrap(), 0.7);
        let g = path(3).unwrap().with_measure(vec![1.0, 1.0, 10.0]).unwrap();
        let f = vf(&[0.0, 1.0, 5.0]);
        // Oracle: scan every candidate in the value set of f.
        let cost = |gamma: f64| (0..3).map(|x| g.measure()[x] * (f[x] - gamma).abs()).sum::<f64>();
        let best = [0.0, 1.0, 5.0]
            .into_iter()
            .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
            .unwrap();
        assert_eq!(best, 5.0);
        assert_eq!(p_mean_shift(&g, &f, 1.0).unwrap(), best);
        // smallest minimizer on a plateau
        assert_eq!(p_mean_shift(&k2, &vf(&[0.0, 2.0]), 1.0).unwrap(), 0.0);
        let s = p_mean_shift(&k2, &vf(&[0.0, 2.0]), 3.0).unwrap();
        assert!((s - 1.0).abs() < 1e-11);
    }

    #[test]
    fn rayleigh_examples() {
        let k2 = complete(2).unwrap();
        let q = rayleigh(&k2, &vf(&[1.0, -1.0]), 2.0, QuotientVariant::Gap).unwrap();
        assert_eq!(q.shift, 0.0);
        assert_eq!(q.quotient, 2.0);
        assert_eq!(
            rayleigh(&k2, &vf(&[1.0, 1.0]), 2.0, QuotientVariant::Gap),
            Err(Error::ConstantFunction)
        );
        assert_eq!(
            rayleigh(&k2, &vf(&[0.0, 0.0]), 2.0, QuotientVariant::Ground),
            Err(Error::ZeroFunction)
        );
        let g = crate::generators::erdos_renyi(9, 0.5, 1)
            .unwrap()
            .with_measure((0..9).map(|i| 0.5 + i as f64 * 0.25).collect())
            .unwrap();
        let w = VertexSet::new(vec![0, 3, 4, 8]);
        let cut = boundary_measure(&g, &w, &PairWeight::edge_weights(&g)).unwrap().value;
        for p in [1.0, 1.5, 2.0, 4.0] {
            let q = rayleigh(&g, &VertexFunction::indicator(9, &w), p, QuotientVariant::Ground).unwrap();
            assert!((q.quotient - cut / g.measure_of(&w)).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_examples() {
        let k2 = complete(2).unwrap();
        let f = vf(&[1.0, -1.0]);
        assert_eq!(weak_solution_residual(&k2, &f, 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(weak_solution_residual(&k2, &f, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(
            weak_solution_residual(&path(5).unwrap(), &vf(&[3.0; 5]), 0.0, 1.7).unwrap(),
            0.0
        );
    }

    #[test]
    fn function_file_round_trip() {
        let g = crate::graph::parse_graph("V b\nV a\nE a b 1\n").unwrap();
        let f = vf(&[2.5, -1.0]);
        let text = write_function(&g, &f);
        assert_eq!(text, "F a -1\nF b 2.5\n");
        assert_eq!(parse_function(&g, &text).unwrap(), f);
        assert!(parse_function(&g, "F a 1\n").is_err());
        assert!(parse_function(&g, "F a 1\nF a 2\nF b 0\n").is_err());
    }
}

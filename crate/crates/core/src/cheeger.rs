//! Isoperimetric constants with the boundary measure `|dW|_{bd}`.
//!
//! `h1(d) = min |dW|_{bd} / m(W)` over nonempty `W` with `m(W) <= m(X)/2`;
//! on a finite graph `h0(d)` is only meaningful for a Dirichlet truncation,
//! where `W` ranges over nonempty subsets of a marked interior and the
//! boundary is measured in the host graph.
//!
//! Exact constants enumerate subsets in Gray-code order in fixed chunks of
//! `2^12` masks, each chunk restarting from an exactly summed boundary, so
//! accumulated rounding stays at the scale of a few thousand updates. Chunks
//! run in parallel and are merged in chunk order; the reported ratio of the
//! winner is recomputed directly. Ties (ratios within `1e-12` relative)
//! resolve to the smaller measure, then to the lexicographically smallest
//! sorted member list.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{check_len, VertexFunction};
use crate::error::{check_p_open, Error, Result};
use crate::graph::{boundary_of_mask, PairWeight, VertexSet, WeightedGraph};
use crate::metrics::{conjugate, EdgeLength};
use crate::numeric::ksum;

/// Default largest number of enumerated vertices.
pub const DEFAULT_EXACT_CUTOFF: usize = 24;

const CHUNK_BITS: usize = 12;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    /// `-inf` for the full set below `min f`.
    pub threshold: f64,
    pub set: VertexSet,
}

/// `{x : f(x) > t}` for `t` below `min f` and for every distinct value of `f`
/// in increasing order. Between consecutive values the level set is
/// constant, so the list is exhaustive.
pub fn level_sets(f: &VertexFunction) -> Vec<LevelSet> {
    let mut values: Vec<f64> = f.values().to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let n = f.len();
    let mut out = vec![LevelSet {
        threshold: f64::NEG_INFINITY,
        set: VertexSet::full(n),
    }];
    for t in values {
        out.push(LevelSet {
            threshold: t,
            set: VertexSet::new((0..n).filter(|&x| f[x] > t).collect()),
        });
    }
    out
}

fn distinct_sorted(f: &VertexFunction) -> Vec<f64> {
    let mut v = f.values().to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn check_nonnegative(f: &VertexFunction) -> Result<()> {
    if f.values().iter().any(|&v| v < 0.0) {
        Err(Error::NegativeFunction)
    } else {
        Ok(())
    }
}

/// Both sides of the co-area formula
/// `1/2 sum w |f(x) - f(y)| = int_0^inf w(d Omega_t(f)) dt`.
/// The integral is summed exactly over the intervals between distinct values.
pub fn coarea_check(g: &WeightedGraph, w: &PairWeight, f: &VertexFunction) -> Result<(f64, f64)> {
    check_len(g, f)?;
    check_nonnegative(f)?;
    let lhs = ksum(
        g.edges()
            .iter()
            .enumerate()
            .map(|(k, e)| w.get(k) * (f[e.u] - f[e.v]).abs()),
    );
    let vals = distinct_sorted(f);
    let rhs = ksum(vals.windows(2).map(|pair| {
        let inside: Vec<bool> = f.values().iter().map(|&v| v > pair[0]).collect();
        (pair[1] - pair[0]) * boundary_of_mask(g, w, &inside)
    }));
    Ok((lhs, rhs))
}

/// Both sides of the area formula `sum m f = int_0^inf m(Omega_t(f)) dt`.
pub fn area_check(g: &WeightedGraph, f: &VertexFunction) -> Result<(f64, f64)> {
    check_len(g, f)?;
    check_nonnegative(f)?;
    let m = g.measure();
    let lhs = ksum(f.values().iter().zip(m).map(|(v, w)| v * w));
    let vals = distinct_sorted(f);
    let Some(&first) = vals.first() else {
        return Ok((lhs, 0.0));
    };
    let mut terms = vec![first * g.total_measure()];
    for pair in vals.windows(2) {
        let mass = ksum((0..g.len()).filter(|&x| f[x] > pair[0]).map(|x| m[x]));
        terms.push((pair[1] - pair[0]) * mass);
    }
    Ok((lhs, ksum(terms)))
}

/// Both sides of `|a^p - b^p| <= p ((a^p + b^p)/2)^((p-1)/p) |a - b|`.
pub fn chain_rule_proxy_check(a: f64, b: f64, p: f64) -> (f64, f64) {
    let (ap, bp) = (a.powf(p), b.powf(p));
    let lhs = (ap - bp).abs();
    let rhs = p * ((ap + bp) / 2.0).powf((p - 1.0) / p) * (a - b).abs();
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheegerVariant {
    /// `h1`: sets of at most half the total measure.
    H1,
    /// `h0` restricted to subsets of a marked interior of a host graph.
    H0Dirichlet(VertexSet),
}

impl CheegerVariant {
    pub fn label(&self) -> &'static str {
        match self {
            CheegerVariant::H1 => "h1",
            CheegerVariant::H0Dirichlet(_) => "h0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoperimetricResult {
    pub constant: f64,
    pub witness: VertexSet,
    pub boundary: f64,
    pub witness_measure: f64,
    pub mode: Mode,
    pub variant: &'static str,
    pub metric_name: String,
}

/// Sets over which an isoperimetric infimum is taken.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Every nonempty subset (includes `X`, so the constant is 0).
    AllSets,
    /// Nonempty subsets with `m(W) <= m(X)/2`.
    HalfMeasure,
    /// Nonempty subsets of the given vertices.
    Within(VertexSet),
}

impl From<&CheegerVariant> for Family {
    fn from(v: &CheegerVariant) -> Self {
        match v {
            CheegerVariant::H1 => Family::HalfMeasure,
            CheegerVariant::H0Dirichlet(i) => Family::Within(i.clone()),
        }
    }
}

pub(crate) fn half_limit(g: &WeightedGraph) -> f64 {
    let total = g.total_measure();
    total / 2.0 + TIE_TOL * total
}

#[derive(Debug, Clone)]
struct Candidate {
    ratio: f64,
    measure: f64,
    members: Vec<usize>,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    compare(a, b) == Ordering::Less
}

fn compare(a: &Candidate, b: &Candidate) -> Ordering {
    let tol = TIE_TOL * a.ratio.abs().max(b.ratio.abs()).max(1.0);
    if a.ratio < b.ratio - tol {
        return Ordering::Less;
    }
    if a.ratio > b.ratio + tol {
        return Ordering::Greater;
    }
    let mtol = TIE_TOL * a.measure.max(b.measure);
    if a.measure < b.measure - mtol {
        return Ordering::Less;
    }
    if a.measure > b.measure + mtol {
        return Ordering::Greater;
    }
    a.members.cmp(&b.members)
}

fn merge(best: Option<Candidate>, next: Option<Candidate>) -> Option<Candidate> {
    match (best, next) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Exact minimum of `w(dW) / m(W)` over the family, by enumeration.
pub fn exact_min_ratio(
    g: &WeightedGraph,
    w: &PairWeight,
    family: &Family,
    cutoff: usize,
) -> Result<(f64, VertexSet)> {
    let n = g.len();
    let (cands, half, complement) = match family {
        Family::AllSets => ((0..n).collect::<Vec<_>>(), None, false),
        Family::HalfMeasure => ((0..n).collect(), Some(half_limit(g)), true),
        Family::Within(set) => {
            if set.iter().any(|x| x >= n) {
                return Err(Error::VertexOutOfRange(set.iter().max().unwrap_or(0)));
            }
            (set.members().to_vec(), None, false)
        }
    };
    if cands.is_empty() {
        return Err(Error::NoAdmissibleSet);
    }
    if cands.len() > cutoff || cands.len() > 62 {
        return Err(Error::CutoffExceeded {
            count: cands.len(),
            cutoff,
        });
    }
    // With the complement trick the last candidate is never in the
    // enumerated mask; its side is reached through X \ W.
    let free = if complement { cands.len() - 1 } else { cands.len() };
    let low = free.min(CHUNK_BITS);
    let chunks = 1u64 << (free - low);
    let total_m = g.total_measure();
    let m = g.measure();

    let chunk_best = |chunk: u64| -> Option<Candidate> {
        let mut inside = vec![false; n];
        for (bit, &x) in cands.iter().enumerate().skip(low).take(free - low) {
            inside[x] = (chunk >> (bit - low)) & 1 == 1;
        }
        let mut boundary = boundary_of_mask(g, w, &inside);
        let mut mass = ksum((0..n).filter(|&x| inside[x]).map(|x| m[x]));
        let mut best: Option<Candidate> = None;
        let consider = |inside: &[bool], boundary: f64, mass: f64, best: &mut Option<Candidate>| {
            let mut offer = |take_inside: bool, mass: f64| {
                if mass <= 0.0 || half.is_some_and(|h| mass > h) {
                    return;
                }
                let ratio = boundary.max(0.0) / mass;
                if let Some(b) = best.as_ref() {
                    if ratio > b.ratio + TIE_TOL * b.ratio.abs().max(1.0) {
                        return;
                    }
                }
                let members: Vec<usize> = (0..n).filter(|&x| inside[x] == take_inside).collect();
                if members.is_empty() || (!complement && !take_inside) {
                    return;
                }
                let c = Candidate {
                    ratio,
                    measure: mass,
                    members,
                };
                if best.as_ref().map_or(true, |b| better(&c, b)) {
                    *best = Some(c);
                }
            };
            offer(true, mass);
            if complement {
                offer(false, total_m - mass);
            }
        };
        consider(&inside, boundary, mass, &mut best);
        for step in 1u64..(1u64 << low) {
            let bit = step.trailing_zeros() as usize;
            let x = cands[bit];
            let sign = if inside[x] { -1.0 } else { 1.0 };
            let mut delta = 0.0;
            for nb in g.neighbors(x) {
                let wv = w.get(nb.edge);
                delta += if inside[nb.vertex] { -wv } else { wv };
            }
            inside[x] = !inside[x];
            boundary += sign * delta;
            mass += sign * m[x];
            consider(&inside, boundary, mass, &mut best);
        }
        best
    };

    let per_chunk: Vec<Option<Candidate>> = (0..chunks).into_par_iter().map(chunk_best).collect();
    let best = per_chunk
        .into_iter()
        .fold(None, merge)
        .ok_or(Error::NoAdmissibleSet)?;
    let set = VertexSet::new(best.members);
    let exact = boundary_of_mask(g, w, &set.mask(n)) / g.measure_of(&set);
    Ok((exact, set))
}

fn result(
    g: &WeightedGraph,
    w: &PairWeight,
    set: VertexSet,
    mode: Mode,
    variant: &CheegerVariant,
    metric_name: &str,
) -> IsoperimetricResult {
    let boundary = boundary_of_mask(g, w, &set.mask(g.len()));
    let witness_measure = g.measure_of(&set);
    IsoperimetricResult {
        constant: boundary / witness_measure,
        witness: set,
        boundary,
        witness_measure,
        mode,
        variant: variant.label(),
        metric_name: metric_name.to_string(),
    }
}

/// Exact `h1(d)` or Dirichlet `h0(d)` by enumeration.
pub fn exact_isoperimetric(
    g: &WeightedGraph,
    d: &EdgeLength,
    variant: &CheegerVariant,
    cutoff: usize,
) -> Result<IsoperimetricResult> {
    let w = PairWeight::scaled(g, d);
    let (_, set) = exact_min_ratio(g, &w, &Family::from(variant), cutoff)?;
    Ok(result(g, &w, set, Mode::Exact, variant, &d.name))
}

/// Which level sets a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepLevels {
    /// Level sets of `f` (and of `-f` for `h1`).
    #[default]
    Values,
    /// Level sets `{f_+^p > t}` and `{f_-^p > t}`, `t > 0`.
    PositivePart,
}

/// Best ratio over the nested chain of level sets of `f`.
///
/// The result is an upper bound on the exact constant of the same variant.
pub fn sweep_cut(
    g: &WeightedGraph,
    d: &EdgeLength,
    f: &VertexFunction,
    variant: &CheegerVariant,
    levels: SweepLevels,
) -> Result<IsoperimetricResult> {
    check_len(g, f)?;
    if f.is_constant() {
        return Err(Error::ConstantFunction);
    }
    let w = PairWeight::scaled(g, d);
    let n = g.len();
    let (allowed, half): (Vec<bool>, Option<f64>) = match variant {
        CheegerVariant::H1 => (vec![true; n], Some(half_limit(g))),
        CheegerVariant::H0Dirichlet(i) => (i.mask(n), None),
    };
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut desc: Vec<usize> = (0..n).collect();
    desc.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let asc: Vec<usize> = desc.iter().rev().copied().collect();
    match levels {
        SweepLevels::Values => {
            chains.push(desc);
            if matches!(variant, CheegerVariant::H1) {
                chains.push(asc);
            }
        }
        SweepLevels::PositivePart => {
            chains.push(desc.into_iter().filter(|&x| f[x] > 0.0).collect());
            chains.push(asc.into_iter().filter(|&x| f[x] < 0.0).collect());
        }
    }
    let mut best: Option<Candidate> = None;
    for chain in &chains {
        let mut inside = vec![false; n];
        let mut boundary = 0.0;
        let mut mass = 0.0;
        let mut count = 0;
        let mut i = 0;
        while i < chain.len() {
            // add the whole group of equal values
            let value = f[chain[i]];
            while i < chain.len() && f[chain[i]] == value {
                let x = chain[i];
                i += 1;
                if !allowed[x] {
                    continue;
                }
                for nb in g.neighbors(x) {
                    let wv = w.get(nb.edge);
                    boundary += if inside[nb.vertex] { -wv } else { wv };
                }
                inside[x] = true;
                mass += g.measure()[x];
                count += 1;
            }
            if count == 0 || half.is_some_and(|h| mass > h) {
                continue;
            }
            let c = Candidate {
                ratio: boundary.max(0.0) / mass,
                measure: mass,
                members: (0..n).filter(|&x| inside[x]).collect(),
            };
            if best.as_ref().map_or(true, |b| better(&c, b)) {
                best = Some(c);
            }
        }
    }
    let best = best.ok_or(Error::NoAdmissibleSet)?;
    Ok(result(g, &w, VertexSet::new(best.members), Mode::Sweep, variant, &d.name))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralIsoperimetricReport {
    pub p: f64,
    /// `h_{p,w,m,G}`.
    pub h: f64,
    pub h_witness: VertexSet,
    pub k_weights: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub holds: bool,
}

/// Evaluates both sides of
/// `2^(p-1)/p^p h^p ||f||_{m,p}^(p^2) <= ||f||_{k,p}^(p(p-1)) E_p(f)`
/// with `k(x) = sum_y b(x,y) sigma(x,y)^(p/(p-1))` and `h` the exact
/// constant of `w` over `family`.
///
/// `f` must belong to the class generating `family`: its support must have
/// at most half the measure for [`Family::HalfMeasure`] and lie inside the
/// given set for [`Family::Within`].
pub fn general_isoperimetric_check(
    g: &WeightedGraph,
    w: &PairWeight,
    sigma: &EdgeLength,
    family: &Family,
    f: &VertexFunction,
    p: f64,
    cutoff: usize,
) -> Result<GeneralIsoperimetricReport> {
    check_p_open(p)?;
    check_len(g, f)?;
    for (k, e) in g.edges().iter().enumerate() {
        let cap = e.weight * sigma.get(k);
        if w.get(k) > cap + 1e-12 * cap.max(1.0) {
            return Err(Error::WeightDomination {
                u: g.id(e.u).into(),
                v: g.id(e.v).into(),
            });
        }
    }
    let support = VertexSet::new((0..g.len()).filter(|&x| f[x] != 0.0).collect());
    match family {
        Family::AllSets => {}
        Family::HalfMeasure => {
            if g.measure_of(&support) > half_limit(g) {
                return Err(Error::NotAdmissible("support exceeds half the measure".into()));
            }
        }
        Family::Within(set) => {
            if !support.is_subset(set) {
                return Err(Error::NotAdmissible("support leaves the admissible set".into()));
            }
        }
    }
    let (h, h_witness) = exact_min_ratio(g, w, family, cutoff)?;
    let q = conjugate(p);
    let k_weights: Vec<f64> = (0..g.len())
        .map(|x| ksum(g.neighbors(x).iter().map(|nb| nb.weight * sigma.get(nb.edge).powf(q))))
        .collect();
    let m_norm = ksum((0..g.len()).map(|x| g.measure()[x] * f[x].abs().powf(p)));
    let k_norm = ksum((0..g.len()).map(|x| k_weights[x] * f[x].abs().powf(p)));
    let e = crate::energy::energy_unchecked(g, f.values(), p);
    let lhs = 2f64.powf(p - 1.0) / p.powf(p) * h.powf(p) * m_norm.powf(p);
    let rhs = k_norm.powf(p - 1.0) * e;
    let slack = rhs - lhs;
    Ok(GeneralIsoperimetricReport {
        p,
        h,
        h_witness,
        k_weights,
        lhs,
        rhs,
        slack,
        holds: slack >= -1e-10 * lhs.max(rhs),
    })
}

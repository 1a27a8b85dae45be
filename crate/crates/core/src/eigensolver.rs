//! Numerical minimization of the Rayleigh quotients behind `lambda^(0)_p`
//! (Dirichlet truncations) and `lambda^(1)_p`.
//!
//! Every reported value is the recomputed quotient of a feasible function,
//! so it is an upper bound on the variational infimum. For `p != 2` the
//! landscape may have local minima; nothing here certifies optimality.
//!
//! The descent works in the `m`-weighted inner product. After normalizing
//! `||f||_{m,p} = 1` (and centering at the `p`-mean for the gap), the
//! gradient of the quotient is `p (m L_p f - Q m |f|^(p-2) f)`, so the
//! steepest direction in the `m`-metric is `-(L_p f - Q |f|^(p-2) f)`, whose
//! sup norm times `m` is exactly the weak-solution residual. Steps start
//! from a Barzilai-Borwein estimate and backtrack until Armijo decrease.
//!
//! Start vectors: the `p = 2` eigenvector from [`linear_oracle_full`],
//! then any caller-supplied warm starts, then `restarts - 1` uniform random
//! vectors in `[-1, 1]` drawn from `ChaCha8Rng::seed_from_u64(derive_seed(seed, i))`
//! for `i = 1, 2, ...`. Starts run in parallel; the winner is the smallest
//! quotient, ties going to the earliest start.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{cheeger_lower_bound, VERDICT_TOL};
use crate::cheeger::{exact_isoperimetric, CheegerVariant, DEFAULT_EXACT_CUTOFF};
use crate::energy::{
    energy_unchecked, flux, p_mean_shift_unchecked, rayleigh, shifted_norm_pow, QuotientVariant,
    VertexFunction,
};
use crate::error::{check_p_open, Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::metrics::{constant_length, degree_metric};
use crate::numeric::{derive_seed, ksum, signed_pow};

pub const DEFAULT_DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRule {
    pub initial: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule {
            initial: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub step: StepRule,
    /// Relative quotient change below which a run counts as stalled.
    pub tol_rel: f64,
    /// Initial smoothing for `p < 2`, relative to `max |f|` of the start.
    pub smoothing_eps: f64,
    /// Converged means residual `<= residual_tol * max(1, lambda)`.
    pub residual_tol: f64,
    /// Largest problem handed to the dense linear solver.
    pub dense_limit: usize,
    /// Extra feasible start vectors, tried after the linear eigenvector.
    #[serde(skip)]
    pub warm_starts: Vec<VertexFunction>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 4,
            seed: 0,
            max_iters: 20_000,
            step: StepRule::default(),
            tol_rel: 1e-13,
            smoothing_eps: 1e-8,
            residual_tol: 1e-6,
            dense_limit: DEFAULT_DENSE_LIMIT,
            warm_starts: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invalid(format!("solver config: {msg}")));
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.tol_rel > 0.0) {
            return bad("tol_rel must be positive");
        }
        if !(self.smoothing_eps >= 0.0) {
            return bad("smoothing_eps must be nonnegative");
        }
        if !(self.step.shrink > 0.0 && self.step.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if !(self.step.initial > 0.0) || !(self.step.sufficient_decrease > 0.0) {
            return bad("step parameters must be positive");
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_warm_start(mut self, f: VertexFunction) -> Self {
        self.warm_starts.push(f);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Descent,
    /// Locally constant minimizer with quotient 0.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub p: f64,
    pub variant: QuotientVariant,
    /// Recomputed quotient of `minimizer`; an upper bound.
    pub lambda_estimate: f64,
    /// Centered (gap) and normalized to `||f||_{m,p} = 1`.
    pub minimizer: VertexFunction,
    /// Weak-solution residual at `lambda_estimate`, over the interior for
    /// the Dirichlet variant.
    pub residual: f64,
    /// `sum_x m(x) |f(x)|^(p-2) f(x)`.
    pub signed_p_mean: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the winning start.
    pub start: usize,
    pub method: Method,
}

struct Problem<'a> {
    g: &'a WeightedGraph,
    p: f64,
    /// Dirichlet interior; `None` for the gap.
    free: Option<Vec<bool>>,
}

impl Problem<'_> {
    fn is_free(&self, x: usize) -> bool {
        self.free.as_ref().map_or(true, |m| m[x])
    }

    /// Enforces the constraint set and `||f||_{m,p} = 1`.
    fn project(&self, f: &mut [f64]) -> bool {
        match &self.free {
            Some(mask) => {
                for (v, &keep) in f.iter_mut().zip(mask) {
                    if !keep {
                        *v = 0.0;
                    }
                }
            }
            None => {
                let s = p_mean_shift_unchecked(self.g.measure(), f, self.p);
                let range = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                // shifts at the bisection resolution would only destroy exact zeros
                if s.abs() > 1e-12 * range {
                    for v in f.iter_mut() {
                        *v -= s;
                    }
                }
            }
        }
        let norm = shifted_norm_pow(self.g, f, self.p, 0.0).powf(1.0 / self.p);
        if !(norm > 0.0 && norm.is_finite()) {
            return false;
        }
        for v in f.iter_mut() {
            *v /= norm;
        }
        true
    }

    fn energy(&self, f: &[f64], eps: f64) -> f64 {
        if eps == 0.0 {
            return energy_unchecked(self.g, f, self.p);
        }
        let half = self.p / 2.0;
        let floor = eps.powf(self.p);
        ksum(self.g.edges().iter().map(|e| {
            let t = f[e.u] - f[e.v];
            e.weight * ((t * t + eps * eps).powf(half) - floor)
        }))
    }

    fn flux(&self, f: &[f64], eps: f64) -> Vec<f64> {
        if eps == 0.0 {
            return flux(self.g, f, self.p);
        }
        let e2 = eps * eps;
        let mut acc = vec![0.0; f.len()];
        for e in self.g.edges() {
            let t = f[e.u] - f[e.v];
            let c = e.weight * (t * t + e2).powf(self.p / 2.0 - 1.0) * t;
            acc[e.u] += c;
            acc[e.v] -= c;
        }
        acc
    }

    /// Quotient of a projected vector.
    fn quotient(&self, f: &[f64], eps: f64) -> f64 {
        self.energy(f, eps) / shifted_norm_pow(self.g, f, self.p, 0.0)
    }

    /// `flux - q m |f|^(p-2) f`, zero off the interior.
    fn residual_vec(&self, f: &[f64], q: f64, eps: f64) -> Vec<f64> {
        let fl = self.flux(f, eps);
        let m = self.g.measure();
        (0..f.len())
            .map(|x| {
                if self.is_free(x) {
                    fl[x] - q * m[x] * signed_pow(f[x], self.p - 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn sup(r: &[f64]) -> f64 {
        r.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

struct Run {
    f: Vec<f64>,
    iterations: usize,
    /// Stopped by the stall or residual rule rather than `max_iters`.
    stopped: bool,
}

/// Largest number of free vertices for the Newton polish.
const POLISH_LIMIT: usize = 400;

fn descend(pb: &Problem, start: &[f64], cfg: &SolverConfig) -> Option<Run> {
    let m = pb.g.measure();
    let mut f = start.to_vec();
    if !pb.project(&mut f) {
        return None;
    }
    let scale = Problem::sup(&f);
    let mut eps = if pb.p < 2.0 { cfg.smoothing_eps * scale } else { 0.0 };
    let mut q = pb.quotient(&f, eps);
    let mut r = pb.residual_vec(&f, q, eps);
    let mut t = cfg.step.initial;
    let mut iterations = 0;
    let mut stopped = false;
    let target = |q: f64| cfg.residual_tol * 1e-2 * q.max(1.0);
    let mut checkpoint = 50;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        if eps == 0.0 && Problem::sup(&r) <= target(q) {
            stopped = true;
            break;
        }
        if iterations == checkpoint {
            checkpoint *= 4;
            if let Some((y, qy, res)) = try_polish(pb, &f) {
                f = y;
                if res <= target(qy) {
                    stopped = true;
                    break;
                }
                q = pb.quotient(&f, eps);
                r = pb.residual_vec(&f, q, eps);
                t = cfg.step.initial;
            }
        }
        let dir: Vec<f64> = r.iter().zip(m).map(|(v, w)| -v / w).collect();
        let slope = pb.p * ksum(r.iter().zip(m).map(|(v, w)| v * v / w));
        let mut accepted = None;
        let mut step = t;
        while step > 1e-30 {
            let mut y: Vec<f64> = f.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            if pb.project(&mut y) {
                let qy = pb.quotient(&y, eps);
                if qy <= q - cfg.step.sufficient_decrease * step * slope {
                    accepted = Some((y, qy));
                    break;
                }
            }
            step *= cfg.step.shrink;
        }
        let stalled = match accepted {
            None => true,
            Some((y, qy)) => {
                let change = (q - qy) / q.abs().max(f64::MIN_POSITIVE);
                let r_new = pb.residual_vec(&y, qy, eps);
                // Barzilai-Borwein step in the m-metric
                let mut ss = 0.0;
                let mut sy = 0.0;
                for x in 0..f.len() {
                    let s = y[x] - f[x];
                    let dy = (r_new[x] - r[x]) / m[x];
                    ss += m[x] * s * s;
                    sy += m[x] * s * dy;
                }
                t = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { (step * 2.0).min(1e12) };
                f = y;
                q = qy;
                r = r_new;
                change < cfg.tol_rel
            }
        };
        if stalled {
            if eps > 0.0 {
                eps *= 0.1;
                if eps < 1e-15 * scale {
                    eps = 0.0;
                }
                q = pb.quotient(&f, eps);
                r = pb.residual_vec(&f, q, eps);
                t = cfg.step.initial;
            } else {
                stopped = true;
                break;
            }
        }
    }
    if let Some((y, _, _)) = try_polish(pb, &f) {
        f = y;
    }
    Some(Run {
        f,
        iterations,
        stopped,
    })
}

/// A polished vector with its quotient and residual, if it lowers the
/// residual without raising the quotient.
fn try_polish(pb: &Problem, f: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
    let q = pb.quotient(f, 0.0);
    let polished = polish(pb, f, q)?;
    let q_new = pb.quotient(&polished, 0.0);
    let r_old = Problem::sup(&pb.residual_vec(f, q, 0.0));
    let r_new = Problem::sup(&pb.residual_vec(&polished, q_new, 0.0));
    (q_new <= q * (1.0 + 1e-12) && r_new < r_old).then_some((polished, q_new, r_new))
}

/// Newton iteration on the smoothed weak equation
/// `flux_eps(f) = lambda m s_eps(f)` with `sum m n_eps(f) = 1`, where
/// `s_eps(t) = (t^2 + eps^2)^(p/2 - 1) t` and `n_eps` its antiderivative
/// times `p`. For `p < 2` the smoothing is annealed from `1e-3` to `1e-12`
/// (relative to `max |f|`); the Jacobian is inverted by SVD so plateaus
/// with vanishing curvature do not break the step.
fn polish(pb: &Problem, f0: &[f64], q0: f64) -> Option<Vec<f64>> {
    let idx: Vec<usize> = (0..f0.len()).filter(|&x| pb.is_free(x)).collect();
    let k = idx.len();
    if k > POLISH_LIMIT || k == 0 {
        return None;
    }
    let mut pos = vec![usize::MAX; f0.len()];
    for (i, &x) in idx.iter().enumerate() {
        pos[x] = i;
    }
    let p = pb.p;
    let m = pb.g.measure();
    let scale = Problem::sup(f0);
    let schedule: Vec<f64> = if p < 2.0 {
        (3..=12).map(|e| scale * 10f64.powi(-e)).collect()
    } else {
        vec![0.0]
    };
    let kernel = |t: f64, eps: f64| -> (f64, f64) {
        // (t^2+eps^2)^(p/2-1) t and its derivative
        if eps == 0.0 {
            if t == 0.0 {
                return (0.0, if p == 2.0 { 1.0 } else { 0.0 });
            }
            return (signed_pow(t, p - 1.0), (p - 1.0) * t.abs().powf(p - 2.0));
        }
        let s = t * t + eps * eps;
        let a = s.powf(p / 2.0 - 1.0);
        (a * t, s.powf(p / 2.0 - 2.0) * ((p - 1.0) * t * t + eps * eps))
    };
    let norm_term = |t: f64, eps: f64| -> f64 {
        if eps == 0.0 {
            t.abs().powf(p)
        } else {
            (t * t + eps * eps).powf(p / 2.0) - eps.powf(p)
        }
    };
    let mut f = f0.to_vec();
    let mut lambda = q0;
    let system = |f: &[f64], lambda: f64, eps: f64| -> Vec<f64> {
        let mut out = vec![0.0; k + 1];
        for e in pb.g.edges() {
            let (c, _) = kernel(f[e.u] - f[e.v], eps);
            let c = e.weight * c;
            if pos[e.u] != usize::MAX {
                out[pos[e.u]] += c;
            }
            if pos[e.v] != usize::MAX {
                out[pos[e.v]] -= c;
            }
        }
        for (i, &x) in idx.iter().enumerate() {
            out[i] -= lambda * m[x] * kernel(f[x], eps).0;
        }
        out[k] = ksum(idx.iter().map(|&x| m[x] * norm_term(f[x], eps))) - 1.0;
        out
    };
    let size = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for &eps in &schedule {
        let mut res = system(&f, lambda, eps);
        for _ in 0..60 {
            let r0 = size(&res);
            if r0 <= 1e-15 * lambda.max(1.0) {
                break;
            }
            let mut jac = DMatrix::<f64>::zeros(k + 1, k + 1);
            for e in pb.g.edges() {
                let (_, dc) = kernel(f[e.u] - f[e.v], eps);
                let c = e.weight * dc;
                let (a, b) = (pos[e.u], pos[e.v]);
                if a != usize::MAX {
                    jac[(a, a)] += c;
                    if b != usize::MAX {
                        jac[(a, b)] -= c;
                    }
                }
                if b != usize::MAX {
                    jac[(b, b)] += c;
                    if a != usize::MAX {
                        jac[(b, a)] -= c;
                    }
                }
            }
            for (i, &x) in idx.iter().enumerate() {
                let (s, ds) = kernel(f[x], eps);
                jac[(i, i)] -= lambda * m[x] * ds;
                jac[(i, k)] = -m[x] * s;
                jac[(k, i)] = p * m[x] * s;
            }
            let rhs = nalgebra::DVector::from_vec(res.iter().map(|v| -v).collect());
            let step = jac.svd(true, true).solve(&rhs, 1e-14).ok()?;
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let mut trial = f.clone();
                for (i, &x) in idx.iter().enumerate() {
                    trial[x] += alpha * step[i];
                }
                let tl = lambda + alpha * step[k];
                let tr = system(&trial, tl, eps);
                if size(&tr) < r0 {
                    f = trial;
                    lambda = tl;
                    res = tr;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
    }
    if !f.iter().all(|v| v.is_finite()) {
        return None;
    }
    // |t|^(p-2) t is only (p-1)-Holder at 0: leftovers of size 1e-13
    // would dominate the residual for p near 1
    let tiny = 1e-10 * Problem::sup(&f);
    for v in f.iter_mut() {
        if v.abs() <= tiny {
            *v = 0.0;
        }
    }
    if !pb.project(&mut f) {
        return None;
    }
    Some(f)
}

fn random_start(n: usize, seed: u64, stream: u64, free: Option<&[bool]>) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream));
    (0..n)
        .map(|x| {
            let v = rng.gen_range(-1.0..=1.0);
            if free.map_or(true, |m| m[x]) {
                v
            } else {
                0.0
            }
        })
        .collect()
}

/// Vertices of `free` grouped by connectivity inside `free`.
fn free_components(g: &WeightedGraph, free: &[bool]) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if !free[s] || seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            i += 1;
            for nb in g.neighbors(x) {
                if free[nb.vertex] && !seen[nb.vertex] {
                    seen[nb.vertex] = true;
                    comp.push(nb.vertex);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// A nonzero feasible function of zero energy, if one exists.
fn zero_mode(g: &WeightedGraph, free: Option<&[bool]>) -> Option<Vec<f64>> {
    let n = g.len();
    match free {
        None => {
            let comps = g.components();
            if comps.len() < 2 {
                return None;
            }
            let mut f = vec![-1.0; n];
            for &x in &comps[0] {
                f[x] = 1.0;
            }
            Some(f)
        }
        Some(mask) => {
            let comp = free_components(g, mask).into_iter().find(|c| {
                c.iter()
                    .all(|&x| g.neighbors(x).iter().all(|nb| mask[nb.vertex]))
            })?;
            let mut f = vec![0.0; n];
            for x in comp {
                f[x] = 1.0;
            }
            Some(f)
        }
    }
}

/// Fixes the sign: `sum m f >= 0` for the ground state, and for the gap the
/// first entry of (nearly) maximal modulus is positive.
fn orient(f: &mut [f64], m: &[f64], ground: bool) {
    let flip = if ground {
        ksum(f.iter().zip(m).map(|(v, w)| v * w)) < 0.0
    } else {
        let top = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        f.iter().find(|v| v.abs() >= top * (1.0 - 1e-9)).is_some_and(|&v| v < 0.0)
    };
    if flip {
        for v in f.iter_mut() {
            *v = -*v;
        }
    }
}

fn finish(
    pb: &Problem,
    f: Vec<f64>,
    iterations: usize,
    stopped: bool,
    start: usize,
    method: Method,
    cfg: &SolverConfig,
) -> Result<EigenResult> {
    let variant = if pb.free.is_some() {
        QuotientVariant::Ground
    } else {
        QuotientVariant::Gap
    };
    let mut f = f;
    if !pb.project(&mut f) {
        return Err(Error::InvalidGraph("degenerate minimizer".into()));
    }
    orient(&mut f, pb.g.measure(), pb.free.is_some());
    let minimizer = VertexFunction::new(f)?;
    let lambda = rayleigh(pb.g, &minimizer, pb.p, variant)?.quotient;
    let r = pb.residual_vec(minimizer.values(), lambda, 0.0);
    let residual = Problem::sup(&r);
    let signed_p_mean = ksum(
        minimizer
            .values()
            .iter()
            .zip(pb.g.measure())
            .map(|(v, w)| w * signed_pow(*v, pb.p - 1.0)),
    );
    Ok(EigenResult {
        p: pb.p,
        variant,
        lambda_estimate: lambda,
        minimizer,
        residual,
        signed_p_mean,
        iterations,
        converged: stopped && residual <= cfg.residual_tol * lambda.max(1.0),
        start,
        method,
    })
}

/// One finished result per start, in start order.
fn solve_all(pb: &Problem, cfg: &SolverConfig) -> Result<Vec<EigenResult>> {
    cfg.validate()?;
    let n = pb.g.len();
    for w in &cfg.warm_starts {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: w.len(),
            });
        }
    }
    if let Some(f) = zero_mode(pb.g, pb.free.as_deref()) {
        return Ok(vec![finish(pb, f, 0, true, 0, Method::Analytic, cfg)?]);
    }
    let oracle_variant = match &pb.free {
        None => OracleVariant::Gap,
        Some(mask) => OracleVariant::Ground(VertexSet::from_mask(mask)),
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    match linear_oracle_full(pb.g, &oracle_variant, cfg.dense_limit) {
        Ok(o) => starts.push(o.vector.into_values()),
        Err(_) => starts.push(random_start(n, cfg.seed, 0, pb.free.as_deref())),
    }
    starts.extend(cfg.warm_starts.iter().map(|w| w.values().to_vec()));
    for i in 1..cfg.restarts {
        starts.push(random_start(n, cfg.seed, i as u64, pb.free.as_deref()));
    }
    let runs: Vec<Option<Run>> = starts.par_iter().map(|s| descend(pb, s, cfg)).collect();
    let out: Vec<EigenResult> = runs
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| finish(pb, r.f, r.iterations, r.stopped, i, Method::Descent, cfg)))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::InvalidGraph("no feasible start vector".into()));
    }
    Ok(out)
}

/// Lowest quotient, earliest start on ties.
fn solve(pb: Problem, cfg: &SolverConfig) -> Result<EigenResult> {
    let all = solve_all(&pb, cfg)?;
    Ok(all
        .into_iter()
        .min_by(|a, b| a.lambda_estimate.total_cmp(&b.lambda_estimate).then(a.start.cmp(&b.start)))
        .expect("solve_all returns at least one result"))
}

/// Upper estimate of `lambda^(1)_p` by projected descent.
///
/// Disconnected graphs are answered analytically with `lambda = 0` and the
/// signed indicator of the first component against the rest.
pub fn solve_gap(g: &WeightedGraph, p: f64, cfg: &SolverConfig) -> Result<EigenResult> {
    check_p_open(p)?;
    if g.len() < 2 {
        return Err(Error::InvalidGraph("the gap needs at least two vertices".into()));
    }
    solve(Problem { g, p, free: None }, cfg)
}

/// Every start of [`solve_gap`], finished, in start order. Useful when the
/// minimizer is not unique and its level sets differ between starts.
pub fn solve_gap_all(g: &WeightedGraph, p: f64, cfg: &SolverConfig) -> Result<Vec<EigenResult>> {
    check_p_open(p)?;
    if g.len() < 2 {
        return Err(Error::InvalidGraph("the gap needs at least two vertices".into()));
    }
    solve_all(&Problem { g, p, free: None }, cfg)
}

/// Upper estimate of `lambda^(0)_p` with `f = 0` off `interior`.
///
/// If some connected piece of the interior has no edge leaving it, its
/// indicator has zero energy and `lambda = 0` is returned analytically.
pub fn solve_ground_dirichlet(
    host: &WeightedGraph,
    interior: &VertexSet,
    p: f64,
    cfg: &SolverConfig,
) -> Result<EigenResult> {
    check_p_open(p)?;
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if let Some(x) = interior.iter().find(|&x| x >= host.len()) {
        return Err(Error::VertexOutOfRange(x));
    }
    solve(
        Problem {
            g: host,
            p,
            free: Some(interior.mask(host.len())),
        },
        cfg,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVariant {
    Gap,
    Ground(VertexSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Dense,
    Lanczos,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub vector: VertexFunction,
    pub method: OracleMethod,
}

/// Smallest nontrivial eigenvalue of `L f = lambda m f` (`p = 2`).
pub fn linear_oracle(g: &WeightedGraph, variant: &OracleVariant) -> Result<f64> {
    linear_oracle_full(g, variant, DEFAULT_DENSE_LIMIT).map(|o| o.value)
}

/// [`linear_oracle`] with the eigenvector.
///
/// Up to `dense_limit` free vertices the symmetric matrix
/// `M^(-1/2) L M^(-1/2)` is diagonalized densely. Larger problems use
/// Lanczos on its inverse (applied by conjugate gradients), with the
/// kernel direction `M^(1/2) 1` deflated for the gap.
pub fn linear_oracle_full(
    g: &WeightedGraph,
    variant: &OracleVariant,
    dense_limit: usize,
) -> Result<OracleResult> {
    let n = g.len();
    let free = match variant {
        OracleVariant::Gap => {
            if n < 2 {
                return Err(Error::InvalidGraph("the gap needs at least two vertices".into()));
            }
            None
        }
        OracleVariant::Ground(i) => {
            if i.is_empty() {
                return Err(Error::EmptyInterior);
            }
            if let Some(x) = i.iter().find(|&x| x >= n) {
                return Err(Error::VertexOutOfRange(x));
            }
            Some(i.mask(n))
        }
    };
    if let Some(f) = zero_mode(g, free.as_deref()) {
        return Ok(OracleResult {
            value: 0.0,
            vector: VertexFunction::new(f)?,
            method: OracleMethod::Analytic,
        });
    }
    let idx: Vec<usize> = (0..n).filter(|&x| free.as_ref().map_or(true, |m| m[x])).collect();
    let deflate = free.is_none();
    let op = Operator::new(g, &idx);
    let (value, v, method) = if idx.len() <= dense_limit {
        let (value, v) = op.dense_smallest(deflate);
        (value, v, OracleMethod::Dense)
    } else {
        let (value, v) = op.lanczos_smallest(deflate)?;
        (value, v, OracleMethod::Lanczos)
    };
    let mut full = vec![0.0; n];
    for (k, &x) in idx.iter().enumerate() {
        full[x] = v[k] / op.sqrt_m[k];
    }
    Ok(OracleResult {
        value,
        vector: VertexFunction::new(full)?,
        method,
    })
}

/// `M^(-1/2) L M^(-1/2)` restricted to the free vertices.
struct Operator {
    diag: Vec<f64>,
    sqrt_m: Vec<f64>,
    /// `(row, col, value)` off-diagonal entries, both orientations.
    off: Vec<Vec<(usize, f64)>>,
}

impl Operator {
    fn new(g: &WeightedGraph, idx: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; g.len()];
        for (k, &x) in idx.iter().enumerate() {
            pos[x] = k;
        }
        let m = g.measure();
        let sqrt_m: Vec<f64> = idx.iter().map(|&x| m[x].sqrt()).collect();
        let diag = idx.iter().map(|&x| g.weight_sum(x) / m[x]).collect();
        let off = idx
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                g.neighbors(x)
                    .iter()
                    .filter(|nb| pos[nb.vertex] != usize::MAX)
                    .map(|nb| {
                        let j = pos[nb.vertex];
                        (j, -nb.weight / (sqrt_m[k] * sqrt_m[j]))
                    })
                    .collect()
            })
            .collect();
        Operator { diag, sqrt_m, off }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = self.diag[k] * v[k];
            for &(j, a) in &self.off[k] {
                s += a * v[j];
            }
            *o = s;
        }
    }

    fn kernel(&self) -> Vec<f64> {
        let norm = ksum(self.sqrt_m.iter().map(|s| s * s)).sqrt();
        self.sqrt_m.iter().map(|s| s / norm).collect()
    }

    fn dense_smallest(&self, deflate: bool) -> (f64, Vec<f64>) {
        let k = self.diag.len();
        let mut a = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            a[(i, i)] = self.diag[i];
            for &(j, v) in &self.off[i] {
                a[(i, j)] = v;
            }
        }
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let pick = if deflate { order[1] } else { order[0] };
        let value = eig.eigenvalues[pick].max(0.0);
        (value, eig.eigenvectors.column(pick).iter().copied().collect())
    }

    fn lanczos_smallest(&self, deflate: bool) -> Result<(f64, Vec<f64>)> {
        let k = self.diag.len();
        let z = deflate.then(|| self.kernel());
        let project = |v: &mut [f64]| {
            if let Some(z) = &z {
                let c = dot(z, v);
                for (a, b) in v.iter_mut().zip(z) {
                    *a -= c * b;
                }
            }
        };
        let dim = if deflate { k - 1 } else { k };
        let max_steps = dim.min(400);
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_705);
        let mut q: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        project(&mut q);
        let qn = dot(&q, &q).sqrt();
        scale(&mut q, 1.0 / qn);
        let mut basis: Vec<Vec<f64>> = vec![q];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut best = (0.0, Vec::new());
        for j in 0..max_steps {
            let mut w = self.cg_solve(&basis[j], &project)?;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                }
                project(&mut w);
            }
            let bnorm = dot(&w, &w).sqrt();
            let steps = alpha.len();
            let check = steps % 5 == 0 || steps == max_steps || bnorm <= 1e-14 * a.abs();
            if check {
                let mut t = DMatrix::<f64>::zeros(steps, steps);
                for i in 0..steps {
                    t[(i, i)] = alpha[i];
                    if i + 1 < steps {
                        t[(i, i + 1)] = beta[i];
                        t[(i + 1, i)] = beta[i];
                    }
                }
                let eig = SymmetricEigen::new(t);
                let top = (0..steps)
                    .max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
                    .unwrap_or(0);
                let theta = eig.eigenvalues[top];
                let s = eig.eigenvectors.column(top);
                let mut v = vec![0.0; k];
                for (i, b) in basis.iter().enumerate() {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += s[i] * bi;
                    }
                }
                best = (1.0 / theta, v);
                if (bnorm * s[steps - 1]).abs() <= 1e-13 * theta.abs() || bnorm <= 1e-14 * a.abs() {
                    return Ok(best);
                }
            }
            if bnorm <= 1e-14 * a.abs() {
                break;
            }
            beta.push(bnorm);
            scale(&mut w, 1.0 / bnorm);
            basis.push(w);
        }
        if best.1.is_empty() {
            return Err(Error::InvalidGraph("Lanczos produced no Ritz vector".into()));
        }
        Ok(best)
    }

    /// Conjugate gradients for `A x = rhs` inside the deflated space.
    fn cg_solve(&self, rhs: &[f64], project: &impl Fn(&mut [f64])) -> Result<Vec<f64>> {
        let k = rhs.len();
        let mut x = vec![0.0; k];
        let mut r = rhs.to_vec();
        project(&mut r);
        let mut d = r.clone();
        let mut rr = dot(&r, &r);
        let target = 1e-28 * rr.max(f64::MIN_POSITIVE);
        let mut ad = vec![0.0; k];
        for _ in 0..(20 * k).max(1000) {
            if rr <= target {
                return Ok(x);
            }
            self.apply(&d, &mut ad);
            project(&mut ad);
            let step = rr / dot(&d, &ad);
            for i in 0..k {
                x[i] += step * d[i];
                r[i] -= step * ad[i];
            }
            project(&mut r);
            let rr_new = dot(&r, &r);
            let ratio = rr_new / rr;
            for i in 0..k {
                d[i] = r[i] + ratio * d[i];
            }
            rr = rr_new;
        }
        if rr <= 1e-20 * dot(rhs, rhs) {
            Ok(x)
        } else {
            Err(Error::InvalidGraph("conjugate gradients did not converge".into()))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scale(v: &mut [f64], c: f64) {
    for x in v {
        *x *= c;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub lambda_estimate: f64,
    pub converged: bool,
    pub residual: f64,
    /// `h1(d_p)` with `d_p` the degree metric.
    pub h1_degree_metric: Option<f64>,
    /// `h1(1)`.
    pub h1_unit: Option<f64>,
    /// `2^(p-1)/p^p h1(d_p)^p`.
    pub lower: Option<f64>,
    /// `2^(p-1) h1(1)`.
    pub upper: Option<f64>,
    pub contained: Option<bool>,
}

/// Gap estimates along a decreasing grid of exponents, each warm-started
/// from the previous minimizer, with the bracket
/// `2^(p-1)/p^p h1(d_p)^p <= lambda^(1)_p <= 2^(p-1) h1(1)`.
///
/// Brackets need exact constants; past `cutoff` vertices they are omitted.
/// The `h1(1)` witness indicator is always offered as a start, so the
/// estimate never exceeds the upper bracket.
pub fn p_sweep(
    g: &WeightedGraph,
    p_grid: &[f64],
    cfg: &SolverConfig,
    cutoff: usize,
) -> Result<Vec<SweepRow>> {
    if p_grid.is_empty() {
        return Err(Error::Invalid("empty p grid".into()));
    }
    for &p in p_grid {
        check_p_open(p)?;
    }
    if p_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("p grid must be strictly decreasing".into()));
    }
    let unit = constant_length(g, 1.0)?;
    let h_unit = match exact_isoperimetric(g, &unit, &CheegerVariant::H1, cutoff) {
        Ok(r) => Some(r),
        Err(Error::CutoffExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut rows = Vec::with_capacity(p_grid.len());
    let mut previous: Option<VertexFunction> = None;
    for &p in p_grid {
        let mut run_cfg = cfg.clone();
        if let Some(prev) = previous.take() {
            run_cfg.warm_starts.insert(0, prev);
        }
        if let Some(h) = &h_unit {
            run_cfg
                .warm_starts
                .push(VertexFunction::indicator(g.len(), &h.witness));
        }
        let est = solve_gap(g, p, &run_cfg)?;
        let h_dp = if h_unit.is_some() {
            let dp = degree_metric(g, p)?;
            Some(exact_isoperimetric(g, &dp, &CheegerVariant::H1, cutoff)?.constant)
        } else {
            None
        };
        let lower = h_dp.map(|h| cheeger_lower_bound(h, p));
        let upper = h_unit.as_ref().map(|h| 2f64.powf(p - 1.0) * h.constant);
        let contained = lower.zip(upper).map(|(lo, up)| {
            lo <= est.lambda_estimate + VERDICT_TOL && est.lambda_estimate <= up + VERDICT_TOL
        });
        rows.push(SweepRow {
            p,
            lambda_estimate: est.lambda_estimate,
            converged: est.converged,
            residual: est.residual,
            h1_degree_metric: h_dp,
            h1_unit: h_unit.as_ref().map(|h| h.constant),
            lower,
            upper,
            contained,
        });
        previous = Some(est.minimizer);
    }
    Ok(rows)
}

/// `p_sweep` with the default enumeration cutoff.
pub fn p_sweep_default(g: &WeightedGraph, p_grid: &[f64], cfg: &SolverConfig) -> Result<Vec<SweepRow>> {
    p_sweep(g, p_grid, cfg, DEFAULT_EXACT_CUTOFF)
}

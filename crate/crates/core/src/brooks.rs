//! Exponential volume growth and the Brooks-type bound
//! `lambda^(0)_p <= mu^p / (2 p^p)`, checked on finite truncations.
//!
//! A truncation of radius `R` is the ball `B_R(o)` around the family's root,
//! with Dirichlet interior `B_(R-1)(o)`. Test functions with `2r <= R - 1`
//! are then supported inside the interior.
//!
//! Finite graphs have no exponential growth in the limit, so `mu` is
//! replaced by a surrogate: the minimum of `(1/r) log(m(B_r)/m(B_1))` over
//! the upper half of the radius schedule, skipping radii where some ball
//! already covers the whole graph.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolver::{linear_oracle_full, solve_ground_dirichlet, OracleVariant, SolverConfig};
use crate::energy::{energy, shifted_norm_pow, VertexFunction};
use crate::error::{Error, Result};
use crate::generators::tree_ball;
use crate::graph::{VertexSet, WeightedGraph};
use crate::metrics::{ball_from_row, constant_length, EdgeLength, Witness, MEMBERSHIP_TOL};
use crate::metrics::PseudoMetric;
use crate::numeric::{derive_seed, ksum};

/// Which centers enter the infimum over `o`.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterSampling {
    All,
    Given(Vec<usize>),
    /// Every vertex for `n <= 200`; otherwise `root` and 32 further centers
    /// drawn from `ChaCha8Rng::seed_from_u64(derive_seed(seed, 0))`.
    Auto { root: usize, seed: u64 },
}

impl CenterSampling {
    fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        let centers = match self {
            CenterSampling::All => (0..n).collect(),
            CenterSampling::Given(c) => c.clone(),
            CenterSampling::Auto { root, seed } => {
                if n <= 200 {
                    (0..n).collect()
                } else {
                    use rand::{Rng, SeedableRng};
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(*seed, 0));
                    let mut c = vec![*root];
                    while c.len() < 33 {
                        let x = rng.gen_range(0..n);
                        if !c.contains(&x) {
                            c.push(x);
                        }
                    }
                    c
                }
            }
        };
        if centers.is_empty() {
            return Err(Error::Invalid("no centers to sample".into()));
        }
        if let Some(&x) = centers.iter().find(|&&x| x >= n) {
            return Err(Error::VertexOutOfRange(x));
        }
        Ok(centers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeGrowthEstimate {
    pub radii: Vec<f64>,
    /// Per radius, `min_o (1/r) log(m(B_r(o)) / m(B_1(o)))`.
    pub log_ratios: Vec<f64>,
    /// Some sampled ball of this radius is the whole graph.
    pub saturated: Vec<bool>,
    pub mu_estimate: f64,
    /// Radii whose log ratios entered `mu_estimate`.
    pub window: Vec<f64>,
    pub centers_sampled: Vec<usize>,
}

pub fn volume_growth(
    g: &WeightedGraph,
    pm: &PseudoMetric,
    radii: &[f64],
    centers: &CenterSampling,
) -> Result<VolumeGrowthEstimate> {
    if radii.is_empty() || radii[0] < 1.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("radii must be increasing and at least 1".into()));
    }
    if pm.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            got: pm.len(),
        });
    }
    let centers = centers.resolve(g.len())?;
    let total = g.total_measure();
    let per_center: Vec<(Vec<f64>, Vec<bool>)> = centers
        .par_iter()
        .map(|&o| {
            let row = pm.row(o);
            let base = g.measure_of(&ball_from_row(&row, 1.0));
            let mut ratios = Vec::with_capacity(radii.len());
            let mut sat = Vec::with_capacity(radii.len());
            for &r in radii {
                let mass = g.measure_of(&ball_from_row(&row, r));
                ratios.push((mass / base).ln() / r);
                sat.push(mass >= total);
            }
            (ratios, sat)
        })
        .collect();
    let mut log_ratios = vec![f64::INFINITY; radii.len()];
    let mut saturated = vec![false; radii.len()];
    for (ratios, sat) in &per_center {
        for i in 0..radii.len() {
            log_ratios[i] = log_ratios[i].min(ratios[i]);
            saturated[i] |= sat[i];
        }
    }
    let window: Vec<usize> = (radii.len() / 2..radii.len()).filter(|&i| !saturated[i]).collect();
    if window.is_empty() {
        return Err(Error::Saturated);
    }
    let mu_estimate = window.iter().map(|&i| log_ratios[i]).fold(f64::INFINITY, f64::min);
    Ok(VolumeGrowthEstimate {
        radii: radii.to_vec(),
        log_ratios,
        saturated,
        mu_estimate,
        window: window.iter().map(|&i| radii[i]).collect(),
        centers_sampled: centers,
    })
}

/// `mu^p / (2 p^p)`.
pub fn brooks_bound(mu: f64, p: f64) -> f64 {
    mu.powf(p) / (2.0 * p.powf(p))
}

/// Both sides of `|e^s - e^t|^p <= 1/2 (e^(sp) + e^(tp)) |s - t|^p`.
pub fn exponential_sum_check(s: f64, t: f64, p: f64) -> (f64, f64) {
    let lhs = (s.exp() - t.exp()).abs().powf(p);
    let rhs = 0.5 * ((s * p).exp() + (t * p).exp()) * (s - t).abs().powf(p);
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrooksMetricCertificate {
    pub p: f64,
    /// `m(x) - sum_y b(x,y) d(x,y)^p` per vertex.
    pub slack: Vec<f64>,
    pub worst_slack: f64,
    pub is_member: bool,
    pub witness: Witness,
}

/// `sum_y b(x,y) d(x,y)^p <= m(x)`, with exponent `p` rather than the
/// `p/(p-1)` of `R_p(b,m)`.
pub fn brooks_metric_check(g: &WeightedGraph, pm: &PseudoMetric, p: f64) -> Result<BrooksMetricCertificate> {
    let d = pm.restrict_to_edges(g, "pm");
    brooks_length_check(g, &d, p)
}

/// [`brooks_metric_check`] for lengths already restricted to edges.
pub fn brooks_length_check(g: &WeightedGraph, d: &EdgeLength, p: f64) -> Result<BrooksMetricCertificate> {
    crate::error::check_p_closed(p)?;
    let slack: Vec<f64> = (0..g.len())
        .map(|x| {
            g.measure()[x] - ksum(g.neighbors(x).iter().map(|nb| nb.weight * d.get(nb.edge).powf(p)))
        })
        .collect();
    let (worst_x, worst) = slack
        .iter()
        .enumerate()
        .map(|(x, &s)| (x, s / g.measure()[x]))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let is_member = worst >= -MEMBERSHIP_TOL;
    Ok(BrooksMetricCertificate {
        p,
        worst_slack: slack.get(worst_x).copied().unwrap_or(0.0),
        slack,
        is_member,
        witness: if is_member {
            Witness::None
        } else {
            Witness::Vertex {
                id: g.id(worst_x).to_string(),
            }
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrooksTestFunction {
    pub r: f64,
    pub x0: usize,
    pub alpha: f64,
    pub f: VertexFunction,
    pub g: VertexFunction,
}

/// `f = ((e^(alpha r) min e^(alpha (2r - d(x0, .)))) - 1) max 0` and
/// `g = (f + 2) 1_(B_2r(x0))`.
pub fn build_test_function(
    graph: &WeightedGraph,
    pm: &PseudoMetric,
    r: f64,
    x0: usize,
    alpha: f64,
) -> Result<BrooksTestFunction> {
    if !(alpha > 0.0) || !(r >= 1.0) {
        return Err(Error::Invalid("test functions need alpha > 0 and r >= 1".into()));
    }
    if x0 >= graph.len() {
        return Err(Error::VertexOutOfRange(x0));
    }
    let row = pm.row(x0);
    let top = (alpha * r).exp();
    let f: Vec<f64> = row
        .iter()
        .map(|&dx| (top.min((alpha * (2.0 * r - dx)).exp()) - 1.0).max(0.0))
        .collect();
    let g: Vec<f64> = row
        .iter()
        .zip(&f)
        .map(|(&dx, &fx)| if dx <= 2.0 * r { fx + 2.0 } else { 0.0 })
        .collect();
    Ok(BrooksTestFunction {
        r,
        x0,
        alpha,
        f: VertexFunction::new(f)?,
        g: VertexFunction::new(g)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub pairs_checked: usize,
    /// Minimum of `rhs - lhs` over adjacent pairs.
    pub worst_slack: f64,
    pub holds: bool,
}

/// `|f(x) - f(y)|^p <= alpha^p/2 (g(x)^p + g(y)^p) d(x,y)^p` on every edge.
pub fn pairwise_check(
    graph: &WeightedGraph,
    d: &EdgeLength,
    tf: &BrooksTestFunction,
    p: f64,
) -> PairwiseReport {
    let (f, g) = (&tf.f, &tf.g);
    let mut worst = f64::INFINITY;
    let mut holds = true;
    for (k, e) in graph.edges().iter().enumerate() {
        let lhs = (f[e.u] - f[e.v]).abs().powf(p);
        let rhs = tf.alpha.powf(p) / 2.0 * (g[e.u].powf(p) + g[e.v].powf(p)) * d.get(k).powf(p);
        worst = worst.min(rhs - lhs);
        if lhs > rhs * (1.0 + 1e-12) {
            holds = false;
        }
    }
    PairwiseReport {
        pairs_checked: graph.edges().len(),
        worst_slack: worst,
        holds,
    }
}

/// Graph families with truncations of every radius.
#[derive(Debug, Clone)]
pub enum BrooksFamily {
    /// `k`-regular tree with normalizing measure.
    Tree { k: usize },
    /// A given graph cut down to combinatorial balls around `root`.
    Custom { graph: WeightedGraph, root: usize },
}

#[derive(Debug, Clone)]
pub struct Truncation {
    pub host: WeightedGraph,
    pub interior: VertexSet,
    pub root: usize,
}

impl BrooksFamily {
    pub fn truncation(&self, radius: usize) -> Result<Truncation> {
        if radius < 1 {
            return Err(Error::Invalid("truncation radius must be at least 1".into()));
        }
        match self {
            BrooksFamily::Tree { k } => {
                let t = tree_ball(*k, radius)?;
                Ok(Truncation {
                    host: t.graph.normalizing_measure()?,
                    interior: t.interior(),
                    root: t.root,
                })
            }
            BrooksFamily::Custom { graph, root } => {
                let row = PseudoMetric::combinatorial(graph).row(*root).into_owned();
                let keep = ball_from_row(&row, radius as f64);
                let host = graph.induced(&keep)?;
                let pos = |x: usize| keep.members().binary_search(&x).unwrap_or(0);
                let interior = VertexSet::new(
                    keep.iter()
                        .filter(|&x| row[x] <= (radius - 1) as f64)
                        .map(pos)
                        .collect(),
                );
                Ok(Truncation {
                    host,
                    interior,
                    root: pos(*root),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionRow {
    pub alpha: f64,
    pub r: f64,
    pub quotient: f64,
    /// `alpha^p/2 (||g|| / ||f||)^p`.
    pub bound: f64,
    pub norm_ratio: f64,
    pub pairwise: PairwiseReport,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrooksRow {
    pub radius: usize,
    pub interior_size: usize,
    pub lambda_ground: f64,
    pub converged: bool,
    pub metric_ok: bool,
    pub test_functions: Vec<TestFunctionRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrooksVerification {
    pub p: f64,
    pub growth: VolumeGrowthEstimate,
    pub mu_estimate: f64,
    pub bound: f64,
    pub slack: f64,
    pub rows: Vec<BrooksRow>,
    /// `lambda` strictly decreases along the schedule.
    pub decreasing: bool,
    /// Last `lambda <= bound + slack`.
    pub below_bound: bool,
    pub quotient_route_holds: bool,
    pub note: &'static str,
}

#[derive(Debug, Clone)]
pub struct BrooksOptions {
    /// Multiples of `mu_est / p` used as `alpha`.
    pub alpha_grid: Vec<f64>,
    /// Defaults to `1, ..., R_max - 2` from the root of the largest truncation.
    pub growth_radii: Option<Vec<f64>>,
    pub slack: f64,
    pub solver: SolverConfig,
}

impl Default for BrooksOptions {
    fn default() -> Self {
        BrooksOptions {
            alpha_grid: vec![1.05, 1.25, 1.5],
            growth_radii: None,
            slack: 5e-3,
            solver: SolverConfig::default(),
        }
    }
}

/// Per radius: the Dirichlet `lambda^(0)_p` of the truncation (the linear
/// eigenvalue at `p = 2`), the metric condition, and the quotient route for
/// each test function centered at the root with the largest `r` such that
/// `2r <= R - 1`. Growth is measured from the root, where a truncation
/// looks like the infinite graph for the longest range.
pub fn brooks_verify(
    family: &BrooksFamily,
    p: f64,
    radius_schedule: &[usize],
    opts: &BrooksOptions,
) -> Result<BrooksVerification> {
    crate::error::check_p_open(p)?;
    if radius_schedule.is_empty() || radius_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("radius schedule must be increasing".into()));
    }
    let r_max = *radius_schedule.last().unwrap();
    let largest = family.truncation(r_max)?;
    let radii: Vec<f64> = match &opts.growth_radii {
        Some(r) => r.clone(),
        None => (1..=r_max.saturating_sub(2).max(1)).map(|r| r as f64).collect(),
    };
    let pm_largest = PseudoMetric::combinatorial(&largest.host);
    let growth = volume_growth(
        &largest.host,
        &pm_largest,
        &radii,
        &CenterSampling::Given(vec![largest.root]),
    )?;
    let mu = growth.mu_estimate;
    let alphas: Vec<f64> = opts.alpha_grid.iter().map(|c| c * mu / p).collect();
    let rows: Vec<BrooksRow> = radius_schedule
        .par_iter()
        .map(|&radius| -> Result<BrooksRow> {
            let t = family.truncation(radius)?;
            let d = constant_length(&t.host, 1.0)?;
            let metric_ok = brooks_length_check(&t.host, &d, p)?.is_member;
            if !metric_ok {
                return Err(Error::MetricCheck(format!(
                    "sum b d^p <= m fails on the truncation of radius {radius}"
                )));
            }
            let (lambda, converged) = if p == 2.0 {
                let o = linear_oracle_full(
                    &t.host,
                    &OracleVariant::Ground(t.interior.clone()),
                    opts.solver.dense_limit,
                )?;
                (o.value, true)
            } else {
                let e = solve_ground_dirichlet(&t.host, &t.interior, p, &opts.solver)?;
                (e.lambda_estimate, e.converged)
            };
            let pm = PseudoMetric::combinatorial(&t.host);
            let r = ((radius - 1) / 2) as f64;
            let mut test_functions = Vec::new();
            if r >= 1.0 {
                for &alpha in &alphas {
                    let tf = build_test_function(&t.host, &pm, r, t.root, alpha)?;
                    let pairwise = pairwise_check(&t.host, &d, &tf, p);
                    let e = energy(&t.host, &tf.f, p)?;
                    let nf = shifted_norm_pow(&t.host, tf.f.values(), p, 0.0);
                    let ng = shifted_norm_pow(&t.host, tf.g.values(), p, 0.0);
                    let quotient = e / nf;
                    let bound = alpha.powf(p) / 2.0 * ng / nf;
                    test_functions.push(TestFunctionRow {
                        alpha,
                        r,
                        quotient,
                        bound,
                        norm_ratio: (ng / nf).powf(1.0 / p),
                        holds: pairwise.holds && quotient <= bound * (1.0 + 1e-12),
                        pairwise,
                    });
                }
            }
            Ok(BrooksRow {
                radius,
                interior_size: t.interior.len(),
                lambda_ground: lambda,
                converged,
                metric_ok,
                test_functions,
            })
        })
        .collect::<Result<_>>()?;
    let bound = brooks_bound(mu, p);
    let decreasing = rows.windows(2).all(|w| w[1].lambda_ground < w[0].lambda_ground);
    let below_bound = rows.last().is_some_and(|r| r.lambda_ground <= bound + opts.slack);
    let quotient_route_holds = rows.iter().all(|r| r.test_functions.iter().all(|t| t.holds));
    Ok(BrooksVerification {
        p,
        growth,
        mu_estimate: mu,
        bound,
        slack: opts.slack,
        rows,
        decreasing,
        below_bound,
        quotient_route_holds,
        note: "finite truncations show consistency with the bound; they cannot certify the infinite graph",
    })
}

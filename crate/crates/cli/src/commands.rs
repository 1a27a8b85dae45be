//! Subcommand arguments and their computations.

use std::fs;
use std::path::Path;

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use pcheeger::bounds::{buser_upper_bounds, cheeger_lower_bound, full_report_with, ReportOptions};
use pcheeger::brooks::{brooks_verify, BrooksFamily, BrooksOptions};
use pcheeger::cheeger::{exact_isoperimetric, sweep_cut, CheegerVariant, IsoperimetricResult, Mode, SweepLevels};
use pcheeger::eigensolver::{
    linear_oracle, p_sweep, solve_gap, solve_ground_dirichlet, EigenResult, OracleVariant, SolverConfig,
};
use pcheeger::energy::{parse_function, VertexFunction};
use pcheeger::generators::{generate, GeneratorSpec, MeasurePolicy};
use pcheeger::metrics::{
    check_membership, constant_length, degree_metric, delta, parse_edge_lengths, path_metric_closure, EdgeLength,
};
use pcheeger::partition::partition;
use pcheeger::{parse_graph, Error, VertexSet, WeightedGraph};

use crate::report::Table;

/// Failures mapped to exit codes 2 (invalid input) and 3 (I/O).
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a subcommand hands back for rendering.
pub struct Outcome {
    pub inputs: Vec<String>,
    pub result: Value,
    pub table: Table,
    /// False when some solver run missed its residual tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    /// Graph file, or `gen:<spec>` for a built-in generator
    /// (`complete:N`, `path:N`, `cycle:N`, `er:N:P:SEED`, `kregular:N:K:SEED`,
    /// `tree:K:R`, `pendant:N:K:SEED:W0`).
    pub graph: String,
    /// Replace the vertex measure: `unit` or `normalizing`.
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Random starts on top of the deterministic ones.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Scaled residual below which a minimizer counts as converged.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

impl SolverArgs {
    pub fn config(&self, seed: u64) -> CliResult<SolverConfig> {
        let cfg = SolverConfig {
            restarts: self.restarts,
            seed,
            max_iters: self.max_iters,
            residual_tol: self.tol,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    /// `degree`, `const:<c>` or `file:<path>` (lines `D <u> <v> <value>`).
    #[arg(long, default_value = "degree")]
    pub metric: String,
    /// Replace the lengths by their shortest-path closure on the edges.
    #[arg(long)]
    pub path_closure: bool,
}

struct Loaded {
    graph: WeightedGraph,
    interior: Option<VertexSet>,
}

pub fn read_text(path: &str) -> CliResult<String> {
    fs::read_to_string(Path::new(path)).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn load_graph(args: &GraphArgs) -> CliResult<Loaded> {
    let policy = args.measure.as_deref().map(str::parse::<MeasurePolicy>).transpose()?;
    if let Some(spec) = args.graph.strip_prefix("gen:") {
        let spec: GeneratorSpec = spec.parse()?;
        let out = generate(&spec, policy.unwrap_or_default())?;
        return Ok(Loaded {
            graph: out.graph,
            interior: out.interior,
        });
    }
    let graph = parse_graph(&read_text(&args.graph)?)?;
    let graph = match policy {
        Some(policy) => policy.apply(graph)?,
        None => graph,
    };
    Ok(Loaded { graph, interior: None })
}

fn file_arg<'a>(spec: &'a str, flag: &str) -> CliResult<&'a str> {
    spec.strip_prefix("file:")
        .ok_or_else(|| CliError::Invalid(format!("{flag} expects file:<path>, got `{spec}`")))
}

pub fn parse_metric(g: &WeightedGraph, spec: &str, p: f64, closure: bool) -> CliResult<EdgeLength> {
    let d = if spec == "degree" {
        degree_metric(g, p)?
    } else if let Some(c) = spec.strip_prefix("const:") {
        let c: f64 = c
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad constant in `{spec}`")))?;
        constant_length(g, c)?
    } else if let Some(path) = spec.strip_prefix("file:") {
        parse_edge_lengths(g, &read_text(path)?, path)?
    } else {
        return Err(CliError::Invalid(format!("unknown metric `{spec}`")));
    };
    if closure {
        let name = format!("closure({})", d.name);
        Ok(path_metric_closure(g, &d).restrict_to_edges(g, name))
    } else {
        Ok(d)
    }
}

/// Whitespace-separated vertex ids; `#` starts a comment.
fn parse_interior(g: &WeightedGraph, spec: &str) -> CliResult<VertexSet> {
    let text = read_text(file_arg(spec, "--interior")?)?;
    let ids: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .collect();
    if ids.is_empty() {
        return Err(Error::EmptyInterior.into());
    }
    Ok(VertexSet::from_ids(g, &ids)?)
}

fn interior_for(loaded: &Loaded, spec: Option<&str>) -> CliResult<VertexSet> {
    match (spec, &loaded.interior) {
        (Some(spec), _) => parse_interior(&loaded.graph, spec),
        (None, Some(i)) => Ok(i.clone()),
        (None, None) => Err(CliError::Invalid(
            "the ground variant needs --interior file:<path>".into(),
        )),
    }
}

fn ids(g: &WeightedGraph, set: &VertexSet) -> Vec<String> {
    set.ids(g).into_iter().map(String::from).collect()
}

#[derive(Serialize)]
struct VertexValue<'a> {
    id: &'a str,
    value: f64,
}

fn vertex_values<'a>(g: &'a WeightedGraph, f: &VertexFunction) -> Vec<VertexValue<'a>> {
    g.ids()
        .iter()
        .zip(f.values())
        .map(|(id, &value)| VertexValue { id, value })
        .collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: GraphArgs,
}

pub fn validate(a: &ValidateArgs) -> CliResult<Outcome> {
    let g = load_graph(&a.input)?.graph;
    let components = g.components().len();
    let result = json!({
        "valid": true,
        "vertices": g.len(),
        "edges": g.edges().len(),
        "total_measure": g.total_measure(),
        "components": components,
        "connected": components == 1,
        "unit_weights": g.has_unit_weights(),
        "max_weighted_degree": g.max_weighted_degree(),
        "max_combinatorial_degree": g.max_combinatorial_degree(),
    });
    let mut table = Table::new(vec!["vertices", "edges", "total_measure", "components", "unit_weights"]);
    table.push(vec![
        g.len().into(),
        g.edges().len().into(),
        g.total_measure().into(),
        components.into(),
        g.has_unit_weights().into(),
    ]);
    Ok(Outcome {
        inputs: vec![a.input.graph.clone()],
        result,
        table,
        converged: true,
    })
}

// ---------------------------------------------------------------- metric

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricCmdArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
}

pub fn metric(a: &MetricCmdArgs) -> CliResult<Outcome> {
    let g = load_graph(&a.input)?.graph;
    let d = parse_metric(&g, &a.metric.metric, a.p, a.metric.path_closure)?;
    let cert = check_membership(&g, &d, a.p)?;
    let dl = delta(&g, &d)?;
    // Members with delta > 0 satisfy Deg(x) <= delta^(-p/(p-1)).
    let degree_cap = if a.p > 1.0 && dl > 0.0 {
        Some(dl.powf(-a.p / (a.p - 1.0)))
    } else {
        None
    };
    let max_degree = g.max_weighted_degree();
    let mut table = Table::new(vec!["u", "v", "length"]);
    let lengths: Vec<Value> = g
        .edges()
        .iter()
        .zip(d.values())
        .map(|(e, &len)| {
            table.push(vec![g.id(e.u).into(), g.id(e.v).into(), len.into()]);
            json!({"u": g.id(e.u), "v": g.id(e.v), "length": len})
        })
        .collect();
    let result = json!({
        "metric_name": d.name,
        "p": a.p,
        "delta": dl,
        "membership": cert,
        "max_weighted_degree": max_degree,
        "degree_cap": degree_cap,
        "degree_cap_holds": degree_cap.map(|c| !cert.is_member || max_degree <= c * (1.0 + 1e-12)),
        "lengths": lengths,
    });
    Ok(Outcome {
        inputs: vec![a.input.graph.clone()],
        result,
        table,
        converged: true,
    })
}

// ---------------------------------------------------------------- cheeger

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    H1,
    H0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exact,
    Sweep,
    Auto,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheegerArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::H1)]
    pub variant: VariantArg,
    /// `file:<path>` listing interior vertex ids (required for h0 unless the
    /// generator defines one).
    #[arg(long)]
    pub interior: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Exponent for the degree metric and for the default sweep function.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Largest candidate set size enumerated exactly.
    #[arg(long, default_value_t = pcheeger::cheeger::DEFAULT_EXACT_CUTOFF)]
    pub max_exact_n: usize,
    /// Sweep function, `file:<path>` with lines `F <vertex> <value>`.
    /// Defaults to the minimizer at `--p`.
    #[arg(long)]
    pub function: Option<String>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn cheeger_view(g: &WeightedGraph, r: &IsoperimetricResult) -> Value {
    json!({
        "constant": r.constant,
        "witness": ids(g, &r.witness),
        "boundary": r.boundary,
        "witness_measure": r.witness_measure,
        "mode": r.mode,
        "variant": r.variant,
        "metric_name": r.metric_name,
        "upper_bound_only": r.mode == Mode::Sweep,
    })
}

pub fn cheeger(a: &CheegerArgs, seed: u64) -> CliResult<Outcome> {
    let loaded = load_graph(&a.input)?;
    let g = &loaded.graph;
    let d = parse_metric(g, &a.metric.metric, a.p, a.metric.path_closure)?;
    let variant = match a.variant {
        VariantArg::H1 => CheegerVariant::H1,
        VariantArg::H0 => CheegerVariant::H0Dirichlet(interior_for(&loaded, a.interior.as_deref())?),
    };
    let mut converged = true;
    let mut sweep = || -> CliResult<IsoperimetricResult> {
        let f = match &a.function {
            Some(spec) => parse_function(g, &read_text(file_arg(spec, "--function")?)?)?,
            None => {
                let est = minimizer(g, a.p, &variant, &a.solver.config(seed)?)?;
                converged = est.converged;
                est.minimizer
            }
        };
        let levels = match variant {
            CheegerVariant::H1 => SweepLevels::Values,
            CheegerVariant::H0Dirichlet(_) => SweepLevels::PositivePart,
        };
        Ok(sweep_cut(g, &d, &f, &variant, levels)?)
    };
    let r = match a.mode {
        ModeArg::Exact => exact_isoperimetric(g, &d, &variant, a.max_exact_n)?,
        ModeArg::Sweep => sweep()?,
        ModeArg::Auto => match exact_isoperimetric(g, &d, &variant, a.max_exact_n) {
            Err(Error::CutoffExceeded { .. }) => sweep()?,
            other => other?,
        },
    };
    let mut table = Table::new(vec!["variant", "metric", "mode", "constant", "boundary", "witness_measure", "witness"]);
    table.push(vec![
        r.variant.into(),
        r.metric_name.clone().into(),
        format!("{:?}", r.mode).to_lowercase().into(),
        r.constant.into(),
        r.boundary.into(),
        r.witness_measure.into(),
        r.witness.ids(g).join(" ").into(),
    ]);
    Ok(Outcome {
        inputs: vec![a.input.graph.clone()],
        result: cheeger_view(g, &r),
        table,
        converged,
    })
}

fn minimizer(g: &WeightedGraph, p: f64, variant: &CheegerVariant, cfg: &SolverConfig) -> CliResult<EigenResult> {
    Ok(match variant {
        CheegerVariant::H1 => solve_gap(g, p, cfg)?,
        CheegerVariant::H0Dirichlet(i) => solve_ground_dirichlet(g, i, p, cfg)?,
    })
}

// ---------------------------------------------------------------- eigen

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenVariantArg {
    Gap,
    Ground,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigenArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = EigenVariantArg::Gap)]
    pub variant: EigenVariantArg,
    /// `file:<path>` listing interior vertex ids (ground variant).
    #[arg(long)]
    pub interior: Option<String>,
    #[arg(long, default_value_t = pcheeger::cheeger::DEFAULT_EXACT_CUTOFF)]
    pub max_exact_n: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Serialize)]
struct Bracket {
    /// `2^(p-1)/p^p h(d_p)^p`.
    lower: f64,
    /// `2^(p-1) h1(1)` for the gap, `h0(1)` for the ground state.
    upper: f64,
    h_degree_metric: f64,
    h_unit: f64,
    contains: bool,
}

fn bracket(g: &WeightedGraph, p: f64, variant: &CheegerVariant, lambda: f64, cutoff: usize) -> CliResult<Option<Bracket>> {
    let dp = degree_metric(g, p)?;
    let h_dp = match exact_isoperimetric(g, &dp, variant, cutoff) {
        Err(Error::CutoffExceeded { .. }) => return Ok(None),
        other => other?.constant,
    };
    let unit = constant_length(g, 1.0)?;
    let buser = buser_upper_bounds(g, &unit, variant, p, cutoff)?;
    let lower = cheeger_lower_bound(h_dp, p);
    let tol = pcheeger::bounds::VERDICT_TOL;
    Ok(Some(Bracket {
        lower,
        upper: buser.value,
        h_degree_metric: h_dp,
        h_unit: buser.h,
        contains: lower <= lambda + tol && lambda <= buser.value + tol,
    }))
}

pub fn eigen(a: &EigenArgs, seed: u64) -> CliResult<Outcome> {
    let loaded = load_graph(&a.input)?;
    let g = &loaded.graph;
    let cfg = a.solver.config(seed)?;
    let (variant, oracle_variant) = match a.variant {
        EigenVariantArg::Gap => (CheegerVariant::H1, OracleVariant::Gap),
        EigenVariantArg::Ground => {
            let i = interior_for(&loaded, a.interior.as_deref())?;
            (CheegerVariant::H0Dirichlet(i.clone()), OracleVariant::Ground(i))
        }
    };
    let est = minimizer(g, a.p, &variant, &cfg)?;
    let bracket = bracket(g, a.p, &variant, est.lambda_estimate, a.max_exact_n)?;
    let oracle = if a.p == 2.0 { Some(linear_oracle(g, &oracle_variant)?) } else { None };
    let mut table = Table::new(vec![
        "p", "variant", "lambda_estimate", "converged", "residual", "lower", "upper", "id", "value",
    ]);
    for (id, &v) in g.ids().iter().zip(est.minimizer.values()) {
        table.push(vec![
            a.p.into(),
            format!("{:?}", a.variant).to_lowercase().into(),
            est.lambda_estimate.into(),
            est.converged.into(),
            est.residual.into(),
            bracket.as_ref().map(|b| b.lower).into(),
            bracket.as_ref().map(|b| b.upper).into(),
            id.as_str().into(),
            v.into(),
        ]);
    }
    let result = json!({
        "p": est.p,
        "variant": est.variant,
        "lambda_estimate": est.lambda_estimate,
        "label": "upper bound",
        "converged": est.converged,
        "residual": est.residual,
        "signed_p_mean": est.signed_p_mean,
        "iterations": est.iterations,
        "start": est.start,
        "method": est.method,
        "minimizer": vertex_values(g, &est.minimizer),
        "bracket": to_value(&bracket),
        "linear_oracle": oracle,
    });
    Ok(Outcome {
        inputs: vec![a.input.graph.clone()],
        result,
        table,
        converged: est.converged,
    })
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Strictly decreasing exponents, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,1.5,1.2,1.1,1.05")]
    pub p_grid: Vec<f64>,
    #[arg(long, default_value_t = pcheeger::cheeger::DEFAULT_EXACT_CUTOFF)]
    pub max_exact_n: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn sweep(a: &SweepArgs, seed: u64) -> CliResult<Outcome> {
    let g = load_graph(&a.input)?.graph;
    let rows = p_sweep(&g, &a.p_grid, &a.solver.config(seed)?, a.max_exact_n)?;
    let mut table = Table::new(vec![
        "p", "lambda_estimate", "converged", "residual", "h1_degree_metric", "h1_unit", "lower", "upper", "contained",
    ]);
    for r in &rows {
        table.push(vec![
            r.p.into(),
            r.lambda_estimate.into(),
            r.converged.into(),
            r.residual.into(),
            r.h1_degree_metric.into(),
            r.h1_unit.into(),
            r.lower.into(),
            r.upper.into(),
            r.contained.into(),
        ]);
    }
    Ok(Outcome {
        inputs: vec![a.input.graph.clone()],
        converged: rows.iter().all(|r| r.converged),
        result: json!({ "rows": rows }),
        table,
    })
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// Graph files or `gen:<spec>` generators.
    #[arg(required = true, num_args = 1..)]
    pub graphs: Vec<String>,
    #[arg(long)]
    pub measure: Option<String>,
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    /// Metrics, comma separated; `degree` is resolved at each exponent.
    #[arg(long, value_delimiter = ',', default_value = "degree,const:1")]
    pub metric: Vec<String>,
    #[arg(long)]
    pub path_closure: bool,
    /// `file:<path>` listing interior vertex ids for the ground rows.
    #[arg(long)]
    pub interior: Option<String>,
    #[arg(long, default_value_t = pcheeger::cheeger::DEFAULT_EXACT_CUTOFF)]
    pub max_exact_n: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub const BOUNDS_COLUMNS: [&str; 20] = [
    "input",
    "p",
    "metric",
    "admissible",
    "delta",
    "lambda_gap",
    "gap_converged",
    "h1",
    "h1_mode",
    "cheeger_lower_gap",
    "buser_upper_gap",
    "lambda_ground",
    "h0",
    "cheeger_lower_ground",
    "buser_upper_ground",
    "classical_bound",
    "classical_applicable",
    "intrinsic_over_classical",
    "all_pass",
    "heuristic",
];

pub fn bounds(a: &BoundsArgs, seed: u64) -> CliResult<Outcome> {
    let solver = a.solver.config(seed)?;
    let mut table = Table::new(BOUNDS_COLUMNS.to_vec());
    let mut converged = true;
    let mut out = Vec::new();
    for input in &a.graphs {
        let loaded = load_graph(&GraphArgs {
            graph: input.clone(),
            measure: a.measure.clone(),
        })?;
        let g = &loaded.graph;
        let interior = match (&a.interior, &loaded.interior) {
            (Some(spec), _) => Some(parse_interior(g, spec)?),
            (None, i) => i.clone(),
        };
        for &p in &a.p {
            let metrics = a
                .metric
                .iter()
                .map(|m| parse_metric(g, m, p, a.path_closure))
                .collect::<CliResult<Vec<_>>>()?;
            let opts = ReportOptions {
                metrics: Some(metrics),
                interior: interior.clone(),
                cutoff: a.max_exact_n,
                solver: solver.clone(),
            };
            let rep = full_report_with(g, p, &opts)?;
            converged &= rep.lambda_gap.converged && rep.lambda_ground.as_ref().map_or(true, |s| s.converged);
            for row in &rep.rows {
                table.push(vec![
                    input.as_str().into(),
                    p.into(),
                    row.metric.clone().into(),
                    row.admissible.into(),
                    row.delta.into(),
                    rep.lambda_gap.lambda_estimate.into(),
                    rep.lambda_gap.converged.into(),
                    row.h1.into(),
                    format!("{:?}", row.h1_mode).to_lowercase().into(),
                    row.cheeger_lower_gap.into(),
                    row.buser_upper_gap.into(),
                    rep.lambda_ground.as_ref().map(|s| s.lambda_estimate).into(),
                    row.h0.into(),
                    row.cheeger_lower_ground.into(),
                    row.buser_upper_ground.into(),
                    rep.classical.value.into(),
                    rep.classical.applicable.into(),
                    rep.intrinsic_over_classical.into(),
                    rep.all_pass.into(),
                    rep.heuristic.into(),
                ]);
            }
            out.push(json!({ "input": input, "report": rep }));
        }
    }
    Ok(Outcome {
        inputs: a.graphs.clone(),
        result: Value::Array(out),
        table,
        converged,
    })
}

// ---------------------------------------------------------------- brooks

#[derive(Debug, Clone, Args, Serialize)]
pub struct BrooksArgs {
    /// `tree:<k>` (k-regular tree, normalizing measure) or
    /// `custom:<graph file>` (combinatorial balls around its first vertex).
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Increasing truncation radii, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10,12")]
    pub radii: Vec<usize>,
    /// Multiples of `mu/p` used as test-function rates.
    #[arg(long, value_delimiter = ',', default_value = "1.05,1.25,1.5")]
    pub alpha_grid: Vec<f64>,
    /// Allowance on the final eigenvalue against the bound.
    #[arg(long, default_value_t = 5e-3)]
    pub slack: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn parse_family(spec: &str) -> CliResult<BrooksFamily> {
    if let Some(k) = spec.strip_prefix("tree:") {
        let k = k
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad tree degree in `{spec}`")))?;
        Ok(BrooksFamily::Tree { k })
    } else if let Some(path) = spec.strip_prefix("custom:") {
        let graph = parse_graph(&read_text(path)?)?;
        Ok(BrooksFamily::Custom { graph, root: 0 })
    } else {
        Err(CliError::Invalid(format!("unknown family `{spec}`")))
    }
}

pub fn brooks(a: &BrooksArgs, seed: u64) -> CliResult<Outcome> {
    let family = parse_family(&a.family)?;
    let opts = BrooksOptions {
        alpha_grid: a.alpha_grid.clone(),
        growth_radii: None,
        slack: a.slack,
        solver: a.solver.config(seed)?,
    };
    let v = brooks_verify(&family, a.p, &a.radii, &opts)?;
    let mut table = Table::new(vec![
        "radius",
        "interior_size",
        "lambda_ground",
        "converged",
        "metric_ok",
        "test_functions_hold",
        "mu_estimate",
        "bound",
    ]);
    for r in &v.rows {
        table.push(vec![
            r.radius.into(),
            r.interior_size.into(),
            r.lambda_ground.into(),
            r.converged.into(),
            r.metric_ok.into(),
            r.test_functions.iter().all(|t| t.holds).into(),
            v.mu_estimate.into(),
            v.bound.into(),
        ]);
    }
    Ok(Outcome {
        inputs: vec![a.family.clone()],
        converged: v.rows.iter().all(|r| r.converged),
        result: to_value(&v),
        table,
    })
}

// ---------------------------------------------------------------- partition

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Lengths for the cut ratios: `degree`, `const:<c>` or `file:<path>`.
    #[arg(long, default_value = "const:1")]
    pub metric: String,
    #[arg(long)]
    pub path_closure: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn partition_cmd(a: &PartitionArgs, seed: u64) -> CliResult<Outcome> {
    let g = load_graph(&a.input)?.graph;
    let d = parse_metric(&g, &a.metric, a.p, a.path_closure)?;
    let part = partition(&g, a.p, &d, &a.solver.config(seed)?)?;
    if part.disconnected {
        eprintln!("warning: graph is disconnected; emitting its components as the partition");
    }
    let n = g.len();
    let mut table = Table::new(vec!["id", "part", "sign"]);
    for x in 0..n {
        table.push(vec![
            g.id(x).into(),
            usize::from(part.parts[1].contains(x)).into(),
            (if part.positive.contains(x) { "+" } else { "-" }).into(),
        ]);
    }
    let result = json!({
        "p": part.p,
        "lambda_estimate": part.lambda_estimate,
        "converged": part.converged,
        "positive": ids(&g, &part.positive),
        "nonpositive": ids(&g, &part.nonpositive),
        "sign_cut_ratio": part.sign_cut_ratio,
        "sweep": cheeger_view(&g, &part.sweep),
        "parts": [ids(&g, &part.parts[0]), ids(&g, &part.parts[1])],
        "disconnected": part.disconnected,
    });
    Ok(Outcome {
        inputs: vec![a.input.graph.clone()],
        result,
        table,
        converged: part.converged,
    })
}

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use simplicial_energy::complex::{collapse_zero_subcomplex, DeltaComplex, Mode};
use simplicial_energy::fixtures::Instance;
use simplicial_energy::metric::{
    euclidean_area, induced_quasimetric, simplicial_area, validate_metric, SimplicialMetric,
};
use simplicial_energy::obj::to_obj;
use simplicial_energy::smap::{riemannian_area, volume2_metric, SimplicialMap, Stretch};
use simplicial_energy::solver::{
    flow_family, flow_to_harmonic, minimize_over_metrics, FamilySample, FlowConfig, FlowRecord, Method,
};
use simplicial_energy::targets::{describe_curvature_bound, TargetKind};
use simplicial_energy::verify::{
    check_area_bound, check_convex_hull, check_e_ge_a, check_embedding, check_max_principle,
    check_mean_value, check_vertex_angle_sums, good_triangulation_witness,
    strongest_cotangent_witness, AngleMode, CheckResult, CompareParams, VerifyError,
};

use crate::input::{read_json, write_json, Inputs, Loaded};
use crate::{CliError, Outcome};

fn fail<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::usage(format!("{context}: {e}"))
}

fn ok(body: Value, success: bool) -> Outcome {
    Outcome {
        body,
        success,
        output_dir: None,
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))
}

fn complex_summary(k: &DeltaComplex) -> Value {
    json!({
        "vertices": k.num_vertices(),
        "edges": k.num_edges(),
        "faces": k.num_faces(),
        "mode": k.mode(),
        "euler_characteristic": k.euler_characteristic(),
        "boundary_edges": k.boundary_edges().len(),
        "triangulation": k.is_triangulation(),
        "quad_mesh": k.is_quad_mesh(),
    })
}

// ---------------------------------------------------------------- validate

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
}

pub fn validate(a: &ValidateArgs) -> Result<Outcome, CliError> {
    let loaded = a.inputs.load()?;
    let l = loaded.require_metric()?;
    let report = validate_metric(&loaded.complex, l).map_err(fail("metric"))?;
    let valid = report.is_valid();
    Ok(ok(
        json!({
            "complex": complex_summary(&loaded.complex),
            "metric": report,
            "valid": valid,
        }),
        valid,
    ))
}

// ------------------------------------------------------------------ energy

#[derive(Args, Debug, Serialize)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Tolerance of the conformality verdict.
    #[arg(long, default_value_t = 1e-9)]
    pub conformal_tol: f64,
}

#[derive(Serialize)]
struct StretchStats {
    min: Option<f64>,
    max: Option<f64>,
    mean: Option<f64>,
    infinite: usize,
    zero_length_edges: usize,
}

fn stretch_stats(sigma: &[Stretch], l: &SimplicialMetric) -> StretchStats {
    let finite: Vec<f64> = sigma
        .iter()
        .enumerate()
        .filter(|&(e, _)| l.get(e) > 0.0)
        .filter_map(|(_, s)| match s {
            Stretch::Finite(x) => Some(*x),
            Stretch::Infinite => None,
        })
        .collect();
    let n = finite.len();
    StretchStats {
        min: finite.iter().copied().reduce(f64::min),
        max: finite.iter().copied().reduce(f64::max),
        mean: (n > 0).then(|| finite.iter().sum::<f64>() / n as f64),
        infinite: sigma.iter().filter(|s| matches!(s, Stretch::Infinite)).count(),
        zero_length_edges: (0..l.len()).filter(|&e| l.get(e) == 0.0).count(),
    }
}

pub fn energy(a: &EnergyArgs) -> Result<Outcome, CliError> {
    let loaded = a.inputs.load()?;
    let inst = loaded.instance()?;
    let (k, l, f) = (&inst.complex, &inst.metric, &inst.map);
    let forms = f.energy_forms(k, l).map_err(fail("energy"))?;
    let map_area = f.simplicial_area(k);
    let sigma = f.stretch_factors(k, l);
    let verdict = f.is_conformal(k, l, a.conformal_tol);
    let mut body = json!({
        "complex": complex_summary(k),
        "target": f.target().spec(),
        "curvature_upper_bound": describe_curvature_bound(f.target().as_ref()),
        "status": if forms.corner_sum.is_finite() { "finite" } else { "infinite" },
        "energy": forms.corner_sum,
        "energy_edge_sum": forms.edge_sum,
        "energy_forms_relative_gap": forms.relative_gap(),
        "map_simplicial_area": map_area,
        "metric_simplicial_area": simplicial_area(k, l),
        "riemannian_area": riemannian_area(f, k).map_err(fail("area"))?,
        "stretch": stretch_stats(&sigma, l),
        "conformal": verdict.conformal,
        "conformal_max_deviation": verdict.max_deviation,
        "conformal_components": verdict.components.len(),
    });
    if k.is_triangulation() {
        if let Ok(x) = euclidean_area(k, l) {
            body["metric_euclidean_area"] = json!(x);
        }
    }
    if k.mode() == Mode::Skeleton {
        body["energy2"] = json!(f.energy2(k, l).map_err(fail("energy2"))?);
        body["volume2"] = json!(f.volume2(k));
        body["metric_volume2"] = json!(volume2_metric(k, l));
    }
    Ok(ok(body, true))
}

// -------------------------------------------------------------------- flow

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Gradient,
    Lbfgs,
}

/// Descent parameters shared by `flow`, `optimize-metric` and `verify`.
#[derive(Args, Debug, Serialize)]
pub struct FlowArgs {
    /// Gradient-norm tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Comma-separated fixed vertices; defaults to those of the instance.
    #[arg(long, value_delimiter = ',')]
    pub fixed: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = MethodArg::Lbfgs)]
    pub method: MethodArg,
    /// Record the Riemannian image area at every iteration.
    #[arg(long)]
    pub record_area: bool,
    /// Move every free vertex by a seeded random tangent vector of
    /// per-coordinate size up to this before flowing.
    #[arg(long)]
    pub perturb: Option<f64>,
}

impl FlowArgs {
    fn config(&self, loaded: &Loaded) -> FlowConfig {
        FlowConfig {
            grad_tol: self.tol,
            max_iters: self.max_iters,
            fixed_vertices: self.fixed_vertices(loaded),
            method: match self.method {
                MethodArg::Gradient => Method::Gradient,
                MethodArg::Lbfgs => Method::Lbfgs,
            },
            record_area: self.record_area,
            ..FlowConfig::default()
        }
    }

    fn fixed_vertices(&self, loaded: &Loaded) -> Vec<usize> {
        self.fixed.clone().unwrap_or_else(|| loaded.fixed.clone())
    }

    fn start(&self, f: &SimplicialMap, fixed: &[usize], seed: u64) -> Result<SimplicialMap, CliError> {
        let Some(size) = self.perturb else {
            return Ok(f.clone());
        };
        let t = f.target().clone();
        if !t.is_manifold() {
            return Err(CliError::usage("--perturb needs a manifold target"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut images = Vec::with_capacity(f.images().len());
        for (v, p) in f.images().iter().enumerate() {
            if fixed.contains(&v) || size == 0.0 {
                images.push(p.clone());
                continue;
            }
            let frame = t.tangent_frame(p).map_err(fail("perturb"))?;
            let mut d = vec![0.0; p.0.len()];
            for b in &frame {
                let c: f64 = rng.gen_range(-size..size);
                d.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
            }
            images.push(t.exp(p, &d).map_err(fail("perturb"))?);
        }
        f.with_images(images).map_err(fail("perturb"))
    }
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    energy: f64,
    grad_norm: f64,
    step: f64,
    area: Option<f64>,
}

fn write_trace(path: &Path, trace: &[FlowRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(fail("trace"))?;
    for r in trace {
        w.serialize(TraceRow {
            iteration: r.iteration,
            energy: r.energy,
            grad_norm: r.grad_norm,
            step: r.step,
            area: r.area,
        })
        .map_err(fail("trace"))?;
    }
    w.flush().map_err(fail("trace"))
}

fn write_instance(path: &Path, k: &DeltaComplex, l: &SimplicialMetric, f: &SimplicialMap, fixed: &[usize]) -> Result<(), CliError> {
    let inst = Instance {
        complex: k.clone(),
        metric: l.clone(),
        map: f.clone(),
        fixed: fixed.to_vec(),
    };
    write_json(path, &inst.to_file())
}

#[derive(Args, Debug, Serialize)]
pub struct FlowCmd {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Use the quasi-metric induced by the starting map.
    #[arg(long)]
    pub induced: bool,
    /// Glob of map files forming a family over the input complex and target.
    #[arg(long)]
    pub family: Option<String>,
    /// Start each family member from the previous harmonic map.
    #[arg(long, requires = "family")]
    pub warm_start: bool,
    /// Directory for maps, reports and traces.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn resolve_metric(loaded: &Loaded, f: &SimplicialMap, induced: bool) -> Result<SimplicialMetric, CliError> {
    if induced || loaded.metric.is_none() {
        induced_quasimetric(&loaded.complex, f).map_err(fail("induced metric"))
    } else {
        loaded.require_metric().cloned()
    }
}

pub fn flow(a: &FlowCmd, seed: u64) -> Result<Outcome, CliError> {
    let loaded = a.inputs.load()?;
    let cfg = a.flow.config(&loaded);
    if let Some(pattern) = &a.family {
        return flow_family_cmd(a, &loaded, &cfg, pattern, seed);
    }
    let k = &loaded.complex;
    let f0 = a.flow.start(&loaded.require_map()?, &cfg.fixed_vertices, seed)?;
    let l = resolve_metric(&loaded, &f0, a.induced)?;
    let (g, report) = flow_to_harmonic(k, &f0, &l, &cfg).map_err(fail("flow"))?;
    let area = riemannian_area(&g, k).map_err(fail("area"))?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_json(&dir.join("map.json"), &g.to_file())?;
        write_instance(&dir.join("instance.json"), k, &l, &g, &cfg.fixed_vertices)?;
        write_json(&dir.join("flow_report.json"), &report)?;
        write_trace(&dir.join("trace.csv"), &report.trace)?;
    }
    let success = report.converged();
    Ok(Outcome {
        body: json!({
            "termination": report.termination,
            "iterations": report.iterations,
            "initial_energy": report.trace.first().map(|r| r.energy),
            "final_energy": report.final_energy,
            "final_grad_norm": report.final_grad_norm,
            "monotone": report.is_monotone(),
            "final_riemannian_area": area,
            "final_simplicial_area": g.simplicial_area(k),
            "unchanged": g.images() == f0.images(),
        }),
        success,
        output_dir: a.out.clone(),
    })
}

fn flow_family_cmd(a: &FlowCmd, loaded: &Loaded, cfg: &FlowConfig, pattern: &str, seed: u64) -> Result<Outcome, CliError> {
    let k = &loaded.complex;
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(fail("--family"))?
        .collect::<Result<_, _>>()
        .map_err(fail("--family"))?;
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::usage(format!("--family {pattern} matches no files")));
    }
    let mut samples = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        let f = loaded.build_map(&read_json(p)?)?;
        let f = a.flow.start(&f, &cfg.fixed_vertices, seed.wrapping_add(i as u64))?;
        let metric = if a.induced || loaded.metric.is_none() {
            None
        } else {
            Some(loaded.require_metric()?.clone())
        };
        samples.push(FamilySample { map: f, metric });
    }
    let fam = flow_family(k, &samples, cfg, a.warm_start).map_err(fail("flow"))?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        for (i, (g, r)) in fam.maps.iter().zip(&fam.reports).enumerate() {
            write_json(&dir.join(format!("map_{i:03}.json")), &g.to_file())?;
            write_trace(&dir.join(format!("trace_{i:03}.csv")), &r.trace)?;
        }
        write_json(&dir.join("family_report.json"), &fam)?;
    }
    let members: Vec<Value> = paths
        .iter()
        .zip(&fam.reports)
        .map(|(p, r)| {
            json!({
                "map": p.display().to_string(),
                "termination": r.termination,
                "iterations": r.iterations,
                "final_energy": r.final_energy,
                "monotone": r.is_monotone(),
            })
        })
        .collect();
    let success = fam.reports.iter().all(|r| r.converged());
    Ok(Outcome {
        body: json!({
            "members": members,
            "adjacent_distances": fam.adjacent_distances,
            "all_converged": success,
        }),
        success,
        output_dir: a.out.clone(),
    })
}

// --------------------------------------------------------- optimize-metric

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub flow: FlowArgs,
    /// Stop once an outer round lowers the simplicial area by less than this.
    #[arg(long, default_value_t = 1e-9)]
    pub outer_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_outer: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct AreaRow {
    iteration: usize,
    area: f64,
    energy_at_update: f64,
    energy_area_gap: f64,
    flow_iterations: usize,
}

pub fn optimize_metric(a: &OptimizeArgs, seed: u64) -> Result<Outcome, CliError> {
    let loaded = a.inputs.load()?;
    let cfg = a.flow.config(&loaded);
    let k = &loaded.complex;
    let f0 = a.flow.start(&loaded.require_map()?, &cfg.fixed_vertices, seed)?;
    let (g, l, report) = minimize_over_metrics(k, &f0, a.outer_tol, a.max_outer, &cfg).map_err(fail("optimize"))?;
    let areas = report.areas();
    let monotone = areas.windows(2).all(|w| w[1] <= w[0]);
    let collapse = if report.zero_edges.is_empty() {
        None
    } else {
        Some(collapse_zero_subcomplex(k, &l, &g))
    };
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_instance(&dir.join("optimized.json"), k, &l, &g, &cfg.fixed_vertices)?;
        let mut w = csv::Writer::from_path(dir.join("area_trace.csv")).map_err(fail("trace"))?;
        for s in &report.trace {
            w.serialize(AreaRow {
                iteration: s.iteration,
                area: s.area,
                energy_at_update: s.energy_at_update,
                energy_area_gap: (s.energy_at_update - s.area).abs(),
                flow_iterations: s.flow_iterations,
            })
            .map_err(fail("trace"))?;
        }
        w.flush().map_err(fail("trace"))?;
        if let Some(Ok(c)) = &collapse {
            write_instance(&dir.join("collapsed.json"), &c.complex, &c.metric, &c.map, &[])?;
        }
    }
    let collapse_report = match &collapse {
        None => Value::Null,
        Some(Ok(c)) => json!({
            "collapsed": true,
            "stats": c.stats,
            "energy_after": c.map.energy(&c.complex, &c.metric).map_err(fail("energy"))?,
        }),
        Some(Err(e)) => json!({ "collapsed": false, "error": e.to_string() }),
    };
    Ok(Outcome {
        body: json!({
            "rounds": report.trace.len(),
            "areas": areas,
            "monotone": monotone,
            "final_area": report.final_area,
            "final_energy": g.energy(k, &l).map_err(fail("energy"))?,
            "zero_edges": report.zero_edges,
            "collapse": collapse_report,
        }),
        success: monotone,
        output_dir: a.out.clone(),
    })
}

// ------------------------------------------------------------------ verify

pub const CHECKS: [&str; 8] = [
    "e_ge_a",
    "mean_value",
    "convex_hull",
    "max_principle",
    "area_bound",
    "angle_sums",
    "embedding",
    "good_triangulation",
];

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleModeArg {
    Immersion,
    Embedding,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub flow_args: FlowArgs,
    /// Comma-separated check names (e_ge_a, mean_value, convex_hull,
    /// max_principle, area_bound, angle_sums, embedding, good_triangulation).
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Check tolerance; after `--flow` the harmonic checks use at least
    /// ten times the flow tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub check_tol: f64,
    /// Flow the map to a harmonic one before checking.
    #[arg(long)]
    pub flow: bool,
    /// Curvature bound `a` (sectional curvature ≤ −a) for the area check;
    /// defaults to the target's bound.
    #[arg(long)]
    pub curvature: Option<f64>,
    #[arg(long, value_enum, default_value_t = AngleModeArg::Immersion)]
    pub angle_mode: AngleModeArg,
}

/// Checks that apply to a harmonic map into the given target.
fn default_checks(inst: &Instance, flowed: bool) -> Vec<&'static str> {
    let mut out = vec!["e_ge_a"];
    if !flowed {
        return out;
    }
    let t = inst.map.target();
    match t.kind() {
        TargetKind::Euclidean | TargetKind::FlatTorus => {
            out.extend(["mean_value", "convex_hull"]);
            if t.kind() == TargetKind::Euclidean && t.dim() == 1 {
                out.push("max_principle");
            }
        }
        TargetKind::Hyperbolic | TargetKind::Genus2Octagon => {
            out.extend(["convex_hull", "area_bound"]);
            let closed = inst.complex.boundary_edges().is_empty();
            if closed && t.dim() == 2 && inst.complex.mode() == Mode::Surface {
                out.push("angle_sums");
            }
        }
        TargetKind::MetricTree => {}
    }
    out
}

fn run_check(name: &str, a: &VerifyArgs, inst: &Instance, fixed: &[usize], harmonic_tol: f64) -> Result<CheckResult, VerifyError> {
    let (k, f, l) = (&inst.complex, &inst.map, &inst.metric);
    let tol = a.check_tol;
    match name {
        "e_ge_a" => check_e_ge_a(k, f, l, tol),
        "mean_value" => check_mean_value(k, f, l, fixed, harmonic_tol),
        "convex_hull" => check_convex_hull(k, f, fixed, harmonic_tol),
        "max_principle" => {
            let boundary: Vec<usize> = if fixed.is_empty() {
                k.boundary_vertices().into_iter().collect()
            } else {
                fixed.to_vec()
            };
            check_max_principle(k, f, &boundary, tol)
        }
        "area_bound" => {
            let a_bound = a.curvature.unwrap_or_else(|| {
                let c = f.target().curvature_upper_bound();
                if c.is_finite() && c < 0.0 {
                    -c
                } else {
                    0.0
                }
            });
            let quads = k.is_quad_mesh().then_some(l);
            check_area_bound(k, f, quads, a_bound, harmonic_tol.max(1e-6))
        }
        "angle_sums" => {
            let mode = match a.angle_mode {
                AngleModeArg::Immersion => AngleMode::Immersion,
                AngleModeArg::Embedding => AngleMode::Embedding,
            };
            check_vertex_angle_sums(k, f, mode, harmonic_tol.max(1e-6))
        }
        "embedding" => check_embedding(k, f, harmonic_tol.max(1e-6)),
        "good_triangulation" => {
            let w = good_triangulation_witness(k, f)?;
            Ok(CheckResult {
                name: "good_triangulation".into(),
                pass: w.is_none(),
                residual: if w.is_some() { 1.0 } else { 0.0 },
                witness: w,
                notes: Vec::new(),
            })
        }
        _ => unreachable!("names are validated first"),
    }
}

pub fn verify(a: &VerifyArgs, seed: u64) -> Result<Outcome, CliError> {
    if let Some(names) = &a.checks {
        if let Some(bad) = names.iter().find(|n| !CHECKS.contains(&n.as_str())) {
            return Err(CliError::usage(format!(
                "unknown check {bad:?}; known checks: {}",
                CHECKS.join(", ")
            )));
        }
    }
    let loaded = a.inputs.load()?;
    let mut inst = loaded.instance()?;
    let fixed = a.flow_args.fixed_vertices(&loaded);
    let mut flow_summary = Value::Null;
    let mut harmonic_tol = a.check_tol;
    if a.flow {
        let cfg = a.flow_args.config(&loaded);
        let start = a.flow_args.start(&inst.map, &fixed, seed)?;
        let (g, r) = flow_to_harmonic(&inst.complex, &start, &inst.metric, &cfg).map_err(fail("flow"))?;
        flow_summary = json!({
            "termination": r.termination,
            "iterations": r.iterations,
            "final_energy": r.final_energy,
            "final_grad_norm": r.final_grad_norm,
        });
        harmonic_tol = harmonic_tol.max(10.0 * cfg.grad_tol);
        inst.map = g;
    }
    let names: Vec<String> = match &a.checks {
        Some(n) => n.clone(),
        None => default_checks(&inst, a.flow).into_iter().map(String::from).collect(),
    };
    let mut results = Vec::new();
    let mut all = true;
    for name in &names {
        match run_check(name, a, &inst, &fixed, harmonic_tol) {
            Ok(r) => {
                all &= r.pass;
                results.push(serde_json::to_value(r).expect("results serialize"));
            }
            Err(VerifyError::Unsupported(why)) => {
                return Err(CliError::usage(format!("check {name} does not apply: {why}")));
            }
            Err(e) => return Err(CliError::usage(format!("check {name}: {e}"))),
        }
    }
    Ok(ok(
        json!({
            "flow": flow_summary,
            "checks": results,
            "all_pass": all,
        }),
        all,
    ))
}

// -------------------------------------------------------------- export-obj

#[derive(Args, Debug, Serialize)]
pub struct ExportArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Output OBJ file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn export_obj(a: &ExportArgs) -> Result<Outcome, CliError> {
    let loaded = a.inputs.load()?;
    let f = loaded.require_map()?;
    let text = to_obj(&loaded.complex, &f).map_err(fail("export"))?;
    fs::write(&a.out, &text).map_err(|e| CliError::usage(format!("{}: {e}", a.out.display())))?;
    let count = |tag: &str| text.lines().filter(|s| s.starts_with(tag)).count();
    Ok(ok(
        json!({
            "path": a.out.display().to_string(),
            "vertices": count("v "),
            "faces": count("f "),
        }),
        true,
    ))
}

// --------------------------------------------------------- compare-weights

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Grid size of each planar instance.
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    /// Interior vertex displacement in grid spacings.
    #[arg(long, default_value_t = 0.9)]
    pub jitter: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the strongest cotangent-weight violation here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn compare_weights(a: &CompareArgs, seed: u64) -> Result<Outcome, CliError> {
    if a.grid < 2 || !(0.0..1.0).contains(&a.jitter) {
        return Err(CliError::usage("--grid must be at least 2 and --jitter in [0, 1)"));
    }
    let params = CompareParams {
        instances: a.instances,
        grid: a.grid,
        jitter: a.jitter,
        seed,
        tol: a.tol,
    };
    let report = simplicial_energy::verify::compare_weights(&params).map_err(fail("compare"))?;
    let witness = strongest_cotangent_witness(&report);
    if let (Some(path), Some(w)) = (&a.out, &witness) {
        write_json(path, w)?;
    }
    Ok(ok(
        json!({
            "instances": a.instances,
            "skipped": report.skipped,
            "simplicial_violations": report.simplicial_violations,
            "cotangent_violations": report.cotangent_violations,
            "strongest_witness": witness.map(|w| json!({
                "seed": w.seed,
                "vertex": w.vertex,
                "residual": w.residual,
            })),
        }),
        report.simplicial_violations == 0,
    ))
}

//! WebAssembly bindings behind `www/index.html`.
//!
//! Each exported function takes plain parameters (or a JSON string) and
//! returns a JSON string; the page renders the result on canvases. The
//! `*_json` functions hold the logic and are usable natively.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use simplicial_energy::fixtures::{self, Instance, InstanceFile};
use simplicial_energy::metric::simplicial_area;
use simplicial_energy::obj::poincare;
use simplicial_energy::smap::{riemannian_area, SimplicialMap};
use simplicial_energy::solver::{flow_to_harmonic, FlowConfig, FlowRecord, Method};
use simplicial_energy::targets::TargetKind;

pub const FIXTURES: [&str; 7] = [
    "torus",
    "genus2_fan",
    "dirichlet_disk",
    "annulus_tree",
    "double_tetrahedron",
    "bad_triangle",
    "infinite_energy",
];

fn fixture_instance(name: &str) -> Option<Instance> {
    Some(match name {
        "torus" => fixtures::torus_identity(),
        "genus2_fan" => fixtures::genus2_fan(),
        "dirichlet_disk" => fixtures::dirichlet_disk(4, 0.15),
        "annulus_tree" => fixtures::annulus_tree(6),
        "double_tetrahedron" => fixtures::double_tetrahedron(),
        "bad_triangle" => fixtures::bad_triangle(),
        "infinite_energy" => fixtures::infinite_energy_wheel(),
        _ => return None,
    })
}

/// Pretty JSON of a named reference instance.
pub fn fixture_json(name: &str) -> Result<String, String> {
    let inst = fixture_instance(name).ok_or_else(|| format!("unknown fixture {name:?}"))?;
    Ok(serde_json::to_string_pretty(&inst.to_file()).expect("instances serialize"))
}

#[derive(Serialize)]
struct EnergySummary {
    vertices: usize,
    edges: usize,
    faces: usize,
    euler_characteristic: i64,
    energy: Option<f64>,
    edge_sum_energy: Option<f64>,
    map_simplicial_area: f64,
    metric_simplicial_area: f64,
    riemannian_area: Option<f64>,
    conformal: bool,
    metric_violations: usize,
}

/// Energy and area summary of an instance given as JSON. Infinite energy
/// is reported as `null`.
pub fn energy_json(instance: &str) -> Result<String, String> {
    let file: InstanceFile = serde_json::from_str(instance).map_err(|e| e.to_string())?;
    let inst = Instance::from_file(&file).map_err(|e| e.to_string())?;
    let (k, l, f) = (&inst.complex, &inst.metric, &inst.map);
    let forms = f.energy_forms(k, l).map_err(|e| e.to_string())?;
    let violations = simplicial_energy::metric::validate_metric(k, l)
        .map_err(|e| e.to_string())?
        .violations
        .len();
    let summary = EnergySummary {
        vertices: k.num_vertices(),
        edges: k.num_edges(),
        faces: k.num_faces(),
        euler_characteristic: k.euler_characteristic(),
        energy: forms.corner_sum.finite(),
        edge_sum_energy: forms.edge_sum.finite(),
        map_simplicial_area: f.simplicial_area(k),
        metric_simplicial_area: simplicial_area(k, l),
        riemannian_area: riemannian_area(f, k).ok(),
        conformal: f.is_conformal(k, l, 1e-9).conformal,
        metric_violations: violations,
    };
    Ok(serde_json::to_string(&summary).expect("summaries serialize"))
}

/// Planar drawing of a map: vertex positions and, per edge, the two
/// endpoints of its (lifted) image segment.
#[derive(Serialize)]
struct Drawing {
    points: Vec<[f64; 2]>,
    segments: Vec<[[f64; 2]; 2]>,
}

fn planar(kind: TargetKind, c: &[f64]) -> [f64; 2] {
    let xy = match kind {
        TargetKind::Hyperbolic | TargetKind::Genus2Octagon => poincare(&simplicial_energy::targets::Point(c.to_vec())),
        _ => c.to_vec(),
    };
    [xy[0], xy.get(1).copied().unwrap_or(0.0)]
}

fn drawing(inst: &Instance, f: &SimplicialMap) -> Drawing {
    let kind = f.target().kind();
    let k = &inst.complex;
    Drawing {
        points: f.images().iter().map(|p| planar(kind, &p.0)).collect(),
        segments: (0..k.num_edges())
            .map(|e| {
                let tail = f.image(k.edge(e)[0]);
                [planar(kind, &tail.0), planar(kind, &f.head_lift(k, e).0)]
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct FlowSummary {
    termination: String,
    iterations: usize,
    energies: Vec<f64>,
    final_energy: f64,
    final_grad_norm: f64,
    riemannian_area: f64,
    before: Drawing,
    after: Drawing,
}

fn flow_summary(inst: &Instance, start: &SimplicialMap, cfg: &FlowConfig) -> Result<String, String> {
    let (g, report) = flow_to_harmonic(&inst.complex, start, &inst.metric, cfg).map_err(|e| e.to_string())?;
    let summary = FlowSummary {
        termination: serde_json::to_value(report.termination)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        iterations: report.iterations,
        energies: report.trace.iter().map(|r: &FlowRecord| r.energy).collect(),
        final_energy: report.final_energy,
        final_grad_norm: report.final_grad_norm,
        riemannian_area: riemannian_area(&g, &inst.complex).map_err(|e| e.to_string())?,
        before: drawing(inst, start),
        after: drawing(inst, &g),
    };
    Ok(serde_json::to_string(&summary).expect("summaries serialize"))
}

/// Flows an `n × n` grid disk with boundary on the unit circle to its
/// harmonic map. `method` is `"lbfgs"` or `"gradient"`.
pub fn dirichlet_flow_json(n: usize, scramble: f64, method: &str) -> Result<String, String> {
    if !(1..=40).contains(&n) {
        return Err("grid size must lie in 1..=40".into());
    }
    let method = match method {
        "lbfgs" => Method::Lbfgs,
        "gradient" => Method::Gradient,
        other => return Err(format!("unknown method {other:?}")),
    };
    let inst = fixtures::dirichlet_disk(n, scramble);
    let cfg = FlowConfig {
        grad_tol: 1e-8,
        max_iters: 20_000,
        fixed_vertices: inst.fixed.clone(),
        method,
        ..FlowConfig::default()
    };
    flow_summary(&inst, &inst.map, &cfg)
}

/// Randomly displaces the vertices of the genus-2 identity map (octagon
/// fan subdivided `levels` times) and flows it back to a harmonic map;
/// the drawing is in the Poincaré disk.
pub fn genus2_flow_json(levels: usize, seed: u64, spread: f64) -> Result<String, String> {
    if levels > 2 {
        return Err("at most 2 subdivision levels".into());
    }
    let inst = fixtures::genus2_subdivided(levels);
    let t = inst.map.target().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::new();
    for p in inst.map.images() {
        let frame = t.tangent_frame(p).map_err(|e| e.to_string())?;
        let mut v = vec![0.0; p.0.len()];
        for b in &frame {
            let c: f64 = rng.gen_range(-spread..=spread);
            v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        images.push(t.exp(p, &v).map_err(|e| e.to_string())?);
    }
    let start = inst.map.with_images(images).map_err(|e| e.to_string())?;
    let cfg = FlowConfig {
        grad_tol: 1e-6,
        max_iters: 5_000,
        ..FlowConfig::default()
    };
    flow_summary(&inst, &start, &cfg)
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fixture_names() -> String {
    serde_json::to_string(&FIXTURES).expect("names serialize")
}

#[wasm_bindgen]
pub fn fixture(name: &str) -> Result<String, JsError> {
    js(fixture_json(name))
}

#[wasm_bindgen]
pub fn energy(instance: &str) -> Result<String, JsError> {
    js(energy_json(instance))
}

#[wasm_bindgen]
pub fn dirichlet_flow(n: usize, scramble: f64, method: &str) -> Result<String, JsError> {
    js(dirichlet_flow_json(n, scramble, method))
}

#[wasm_bindgen]
pub fn genus2_flow(levels: usize, seed: u64, spread: f64) -> Result<String, JsError> {
    js(genus2_flow_json(levels, seed, spread))
}

//! Simplicial weights against cotangent weights on planar Dirichlet
//! problems.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_convex_hull, CheckResult, VerifyError, Witness};
use crate::complex::DeltaComplex;
use crate::fixtures::{grid_complex, Instance, InstanceFile};
use crate::metric::{edge_weights, heron, MetricError, SimplicialMetric};
use crate::smap::SimplicialMap;
use crate::targets::{make_target, Point, TargetKind, TargetSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Simplicial,
    Cotangent,
}

/// Cotangent weights `(cot θ₁ + cot θ₂) / 4` of a triangulated metric, the
/// angles taken opposite the edge in its Euclidean triangle realizations.
/// `None` marks edges touching a degenerate triangle.
pub fn cotangent_weights(k: &DeltaComplex, l: &SimplicialMetric) -> Result<Vec<Option<f64>>, MetricError> {
    l.check_count(k)?;
    let mut w: Vec<Option<f64>> = vec![Some(0.0); k.num_edges()];
    for face in k.faces() {
        if face.len() != 3 {
            for s in face {
                w[s.edge] = None;
            }
            continue;
        }
        let len: Vec<f64> = face.iter().map(|s| l.get(s.edge)).collect();
        let area = heron(len[0], len[1], len[2]);
        for i in 0..3 {
            let (a, b, c) = (len[i], len[(i + 1) % 3], len[(i + 2) % 3]);
            let e = face[i].edge;
            w[e] = match w[e] {
                Some(acc) if area > 0.0 => Some(acc + (b * b + c * c - a * a) / (4.0 * area) / 4.0),
                _ => None,
            };
        }
    }
    Ok(w)
}

/// Solves the Dirichlet problem `Σ w_e (f(u) − f(v)) = 0` at every vertex
/// not in `fixed`, keeping the images of `fixed` from `f`. Needs a
/// Euclidean target with identity decks.
pub fn solve_dirichlet(
    k: &DeltaComplex,
    f: &SimplicialMap,
    fixed: &[usize],
    weights: &[f64],
) -> Result<SimplicialMap, VerifyError> {
    if f.target().kind() != TargetKind::Euclidean {
        return Err(VerifyError::Unsupported("linear Dirichlet solves need a Euclidean target".into()));
    }
    let nv = k.num_vertices();
    let mut slot = vec![None; nv];
    let mut n = 0;
    for v in 0..nv {
        if !fixed.contains(&v) {
            slot[v] = Some(n);
            n += 1;
        }
    }
    let dim = f.target().dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, dim);
    for e in 0..k.num_edges() {
        let [u, v] = k.edge(e);
        if u == v {
            continue;
        }
        let w = weights[e];
        for (x, y) in [(u, v), (v, u)] {
            let Some(i) = slot[x] else { continue };
            a[(i, i)] += w;
            match slot[y] {
                Some(j) => a[(i, j)] -= w,
                None => {
                    for d in 0..dim {
                        b[(i, d)] += w * f.image(y).0[d];
                    }
                }
            }
        }
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| VerifyError::Unsupported("singular Dirichlet system".into()))?;
    let images = (0..nv)
        .map(|v| match slot[v] {
            Some(i) => Point((0..dim).map(|d| sol[(i, d)]).collect()),
            None => f.image(v).clone(),
        })
        .collect();
    Ok(f.with_images(images)?)
}

/// Random planar Dirichlet instance: the `n × n` grid with interior vertices
/// moved by up to `jitter` grid spacings, its Euclidean lengths as domain
/// metric, and the boundary mapped onto the unit circle by angle. Interior
/// images start at the scaled domain positions.
pub fn weight_instance(seed: u64, n: usize, jitter: f64) -> Instance {
    let k = grid_complex(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = n as f64 / 2.0;
    let on_boundary = |i: usize, j: usize| i == 0 || j == 0 || i == n || j == n;
    let positions = loop {
        let mut pos = Vec::with_capacity(k.num_vertices());
        for j in 0..=n {
            for i in 0..=n {
                let mut p = [i as f64, j as f64];
                if !on_boundary(i, j) {
                    p[0] += rng.gen_range(-jitter..jitter);
                    p[1] += rng.gen_range(-jitter..jitter);
                }
                pos.push(p);
            }
        }
        let flipped = k.faces().iter().any(|face| {
            let vs: Vec<usize> = face.iter().map(|&s| k.side_start(s)).collect();
            let (p, q, r) = (pos[vs[0]], pos[vs[1]], pos[vs[2]]);
            (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]) <= 1e-6
        });
        if !flipped {
            break pos;
        }
    };
    let lengths = k
        .edges()
        .iter()
        .map(|&[a, b]| (positions[a][0] - positions[b][0]).hypot(positions[a][1] - positions[b][1]))
        .collect();
    let mut fixed = Vec::new();
    let images = (0..k.num_vertices())
        .map(|v| {
            let (i, j) = (v % (n + 1), v / (n + 1));
            let (x, y) = (positions[v][0] - c, positions[v][1] - c);
            if on_boundary(i, j) {
                fixed.push(v);
                let a = y.atan2(x);
                Point(vec![a.cos(), a.sin()])
            } else {
                Point(vec![x / c, y / c])
            }
        })
        .collect();
    let t = make_target(&TargetSpec::Euclidean { dim: 2 }).expect("valid target");
    Instance {
        map: SimplicialMap::with_identity_decks(&k, t, images).expect("valid images"),
        metric: SimplicialMetric::new(lengths).expect("positive lengths"),
        complex: k,
        fixed,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareParams {
    pub instances: usize,
    /// Grid size of each instance.
    pub grid: usize,
    /// Interior vertex displacement, in grid spacings.
    pub jitter: f64,
    pub seed: u64,
    /// Hull tolerance.
    pub tol: f64,
}

impl Default for CompareParams {
    fn default() -> Self {
        Self {
            instances: 1000,
            grid: 4,
            jitter: 0.9,
            seed: 0,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub index: usize,
    /// Seed reproducing the instance through [`weight_instance`].
    pub seed: u64,
    pub simplicial: CheckResult,
    /// `None` if cotangent weights are undefined on the instance.
    pub cotangent: Option<CheckResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightComparison {
    pub params: CompareParams,
    pub skipped: usize,
    pub simplicial_violations: usize,
    pub cotangent_violations: usize,
    /// Instances where either weighting violates the hull property.
    pub violations: Vec<InstanceOutcome>,
}

fn run_one(index: usize, seed: u64, p: &CompareParams) -> Result<InstanceOutcome, VerifyError> {
    let inst = weight_instance(seed, p.grid, p.jitter);
    let (k, l) = (&inst.complex, &inst.metric);
    let simplicial: Vec<f64> = edge_weights(k, l)?
        .into_iter()
        .map(|w| w.expect("positive lengths"))
        .collect();
    let g = solve_dirichlet(k, &inst.map, &inst.fixed, &simplicial)?;
    let simplicial = check_convex_hull(k, &g, &inst.fixed, p.tol)?;
    let cot: Option<Vec<f64>> = cotangent_weights(k, l)?.into_iter().collect();
    let cotangent = match cot {
        Some(w) => {
            let g = solve_dirichlet(k, &inst.map, &inst.fixed, &w)?;
            Some(check_convex_hull(k, &g, &inst.fixed, p.tol)?)
        }
        None => None,
    };
    Ok(InstanceOutcome {
        index,
        seed,
        simplicial,
        cotangent,
    })
}

/// Solves random planar Dirichlet instances with both weightings and
/// counts convex-hull violations of each.
pub fn compare_weights(p: &CompareParams) -> Result<WeightComparison, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let seeds: Vec<u64> = (0..p.instances).map(|_| rng.gen()).collect();
    let outcomes = seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| run_one(i, s, p))
        .collect::<Result<Vec<_>, _>>()?;
    let skipped = outcomes.iter().filter(|o| o.cotangent.is_none()).count();
    let bad = |c: &CheckResult| !c.pass;
    let simplicial_violations = outcomes.iter().filter(|o| bad(&o.simplicial)).count();
    let cotangent_violations = outcomes
        .iter()
        .filter(|o| o.cotangent.as_ref().is_some_and(bad))
        .count();
    let violations = outcomes
        .into_iter()
        .filter(|o| bad(&o.simplicial) || o.cotangent.as_ref().is_some_and(bad))
        .collect();
    Ok(WeightComparison {
        params: p.clone(),
        skipped,
        simplicial_violations,
        cotangent_violations,
        violations,
    })
}

/// A planar Dirichlet instance whose cotangent-weight solution leaves the
/// convex hull of a vertex's neighbours.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CotangentWitness {
    pub instance: InstanceFile,
    pub seed: u64,
    pub grid: usize,
    pub jitter: f64,
    pub vertex: usize,
    /// Distance of the cotangent solution at `vertex` from the hull.
    pub residual: f64,
}

/// The violation of largest residual in a comparison run, as a witness.
pub fn strongest_cotangent_witness(report: &WeightComparison) -> Option<CotangentWitness> {
    let best = report
        .violations
        .iter()
        .filter_map(|o| Some((o, o.cotangent_witness()?, o.cotangent.as_ref()?.residual)))
        .max_by(|a, b| a.2.total_cmp(&b.2))?;
    let (outcome, vertex, residual) = best;
    let p = &report.params;
    Some(CotangentWitness {
        instance: weight_instance(outcome.seed, p.grid, p.jitter).to_file(),
        seed: outcome.seed,
        grid: p.grid,
        jitter: p.jitter,
        vertex,
        residual,
    })
}

/// Re-solves a witness with both weightings: returns the hull checks of the
/// simplicial and the cotangent solutions.
pub fn replay_witness(w: &CotangentWitness) -> Result<(CheckResult, CheckResult), VerifyError> {
    let inst = Instance::from_file(&w.instance)?;
    let (k, l) = (&inst.complex, &inst.metric);
    let simplicial: Vec<f64> = edge_weights(k, l)?.into_iter().map(|x| x.unwrap_or(0.0)).collect();
    let cot: Vec<f64> = cotangent_weights(k, l)?
        .into_iter()
        .map(|x| x.ok_or_else(|| VerifyError::Unsupported("degenerate witness triangle".into())))
        .collect::<Result<_, _>>()?;
    let a = solve_dirichlet(k, &inst.map, &inst.fixed, &simplicial)?;
    let b = solve_dirichlet(k, &inst.map, &inst.fixed, &cot)?;
    Ok((
        check_convex_hull(k, &a, &inst.fixed, 1e-9)?,
        check_convex_hull(k, &b, &inst.fixed, 1e-9)?,
    ))
}

impl InstanceOutcome {
    /// Vertex where the cotangent solution leaves the hull, if it does.
    pub fn cotangent_witness(&self) -> Option<usize> {
        match self.cotangent.as_ref()? {
            CheckResult {
                pass: false,
                witness: Some(Witness::Vertex(v)),
                ..
            } => Some(*v),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_isoceles_cotangents() {
        // unit right triangle: the hypotenuse faces 90°, the legs face 45°
        let k = DeltaComplex::from_lists(&[[0, 1], [1, 2], [0, 2]], &[vec![(0, 1), (1, 1), (2, -1)]]).unwrap();
        let l = SimplicialMetric::new(vec![1.0, 1.0, 2f64.sqrt()]).unwrap();
        let w = cotangent_weights(&k, &l).unwrap();
        assert!((w[0].unwrap() - 0.25).abs() < 1e-15);
        assert!((w[1].unwrap() - 0.25).abs() < 1e-15);
        assert!(w[2].unwrap().abs() < 1e-15);
    }

    #[test]
    fn cotangent_weights_reproduce_linear_maps() {
        let inst = weight_instance(7, 4, 0.3);
        let k = &inst.complex;
        let w: Vec<f64> = cotangent_weights(k, &inst.metric).unwrap().into_iter().map(Option::unwrap).collect();
        // reconstruct domain positions from the grid and pin the boundary to them
        let simplicial: Vec<f64> = edge_weights(k, &inst.metric).unwrap().into_iter().map(Option::unwrap).collect();
        let g = solve_dirichlet(k, &inst.map, &inst.fixed, &simplicial).unwrap();
        assert!(check_convex_hull(k, &g, &inst.fixed, 1e-12).unwrap().pass);
        assert!(w.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn search_finds_a_cotangent_violation() {
        let p = CompareParams {
            instances: 200,
            ..CompareParams::default()
        };
        let report = compare_weights(&p).unwrap();
        assert_eq!(report.simplicial_violations, 0);
        let w = strongest_cotangent_witness(&report).expect("violation within 200 instances");
        let (simplicial, cot) = replay_witness(&w).unwrap();
        assert!(simplicial.pass);
        assert!(!cot.pass);
        assert_eq!(cot.witness, Some(Witness::Vertex(w.vertex)));
    }

    #[test]
    fn comparison_is_reproducible() {
        let p = CompareParams {
            instances: 20,
            ..CompareParams::default()
        };
        let a = compare_weights(&p).unwrap();
        let b = compare_weights(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.simplicial_violations, 0);
    }
}

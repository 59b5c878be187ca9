//! Executable checks of structural properties on concrete maps.
//!
//! Each check returns a [`CheckResult`] with a pass flag, the worst residual
//! found and where it occurred. Checks are pure and deterministic.

mod weights;

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::complex::DeltaComplex;
use crate::metric::{edge_weights, MetricError, SimplicialMetric};
use crate::smap::{face_corner_angles, riemannian_area, MapError, SimplicialMap, ZERO_IMAGE_TOL};
use crate::targets::{DeckElement, Point, TargetError, TargetKind};

pub use weights::{
    compare_weights, cotangent_weights, replay_witness, solve_dirichlet, strongest_cotangent_witness,
    weight_instance, CompareParams, CotangentWitness, InstanceOutcome, WeightComparison, WeightKind,
};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Target(#[from] TargetError),
}

/// Where a residual was attained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    EdgePair(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst-case violation found, never negative.
    pub residual: f64,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            pass: true,
            residual: 0.0,
            witness: None,
            notes: Vec::new(),
        }
    }

    /// Records `value` if it is the worst residual so far.
    fn observe(&mut self, value: f64, at: Witness) {
        if value > self.residual || (value.is_nan() && !self.residual.is_nan()) {
            self.residual = value;
            self.witness = Some(at);
        }
    }

    fn fail(&mut self, note: String) {
        self.pass = false;
        self.notes.push(note);
    }
}

/// Lifts of the far endpoints of every edge slot at `v`, paired with the
/// edge id. Loop edges appear twice.
fn neighbour_lifts(
    k: &DeltaComplex,
    f: &SimplicialMap,
    v: usize,
) -> Result<Vec<(usize, Point)>, TargetError> {
    let t = f.target();
    let mut out = Vec::new();
    for &e in k.vertex_edges(v) {
        let [tail, head] = k.edge(e);
        let g = f.deck(e);
        if tail == v {
            out.push((e, f.head_lift(k, e)));
        }
        if head == v {
            let p = f.image(tail);
            let q = if g.is_identity() {
                p.clone()
            } else {
                t.deck_apply(&t.deck_inverse(g)?, p)?
            };
            out.push((e, q));
        }
    }
    Ok(out)
}

/// Vertices neither on the boundary of `k` nor listed in `fixed`.
fn interior_vertices(k: &DeltaComplex, fixed: &[usize]) -> Vec<usize> {
    let boundary = k.boundary_vertices();
    let fixed: BTreeSet<usize> = fixed.iter().copied().collect();
    (0..k.num_vertices())
        .filter(|v| !boundary.contains(v) && !fixed.contains(v))
        .collect()
}

fn require_flat(f: &SimplicialMap, what: &str) -> Result<(), VerifyError> {
    match f.target().kind() {
        TargetKind::Euclidean | TargetKind::FlatTorus => Ok(()),
        other => Err(VerifyError::Unsupported(format!("{what} needs a Euclidean target, got {other:?}"))),
    }
}

/// Checks `E_S ≥ A_S − tol`, and that equality within `tol` happens exactly
/// when the stretch factors are constant on components (within `tol`).
pub fn check_e_ge_a(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: &SimplicialMetric,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let mut r = CheckResult::new("e_ge_a");
    let energy = f.energy(k, l)?;
    let area = f.simplicial_area(k);
    if !energy.is_finite() {
        r.notes.push("energy is infinite".into());
        return Ok(r);
    }
    let gap = energy.value() - area;
    r.residual = (-gap).max(0.0);
    if gap < -tol {
        r.fail(format!("E = {} is below A = {}", energy.value(), area));
    }
    let verdict = f.is_conformal(k, l, tol);
    let equal = gap.abs() <= tol;
    if equal != verdict.conformal {
        r.fail(format!(
            "|E - A| = {:e} but the stretch deviation is {:e}",
            gap.abs(),
            verdict.max_deviation
        ));
    }
    Ok(r)
}

/// Weighted centroid residual `|f(v) − Σ w_j f(v_j) / Σ w_j|` at every
/// interior vertex, with the edge weights of `l`.
pub fn check_mean_value(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: &SimplicialMetric,
    fixed: &[usize],
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    require_flat(f, "the mean value check")?;
    let weights = edge_weights(k, l)?;
    let mut r = CheckResult::new("mean_value");
    for v in interior_vertices(k, fixed) {
        let p = f.image(v);
        let mut total = 0.0;
        let mut centre = vec![0.0; p.0.len()];
        for (e, q) in neighbour_lifts(k, f, v)? {
            let Some(w) = weights[e] else { continue };
            total += w;
            for (c, x) in centre.iter_mut().zip(&q.0) {
                *c += w * x;
            }
        }
        if total == 0.0 {
            continue;
        }
        let residual = centre
            .iter()
            .zip(&p.0)
            .map(|(c, x)| (c / total - x).powi(2))
            .sum::<f64>()
            .sqrt();
        r.observe(residual, Witness::Vertex(v));
    }
    if !(r.residual <= tol) {
        r.fail(format!("centroid residual {:e} exceeds {tol:e}", r.residual));
    }
    Ok(r)
}

/// Distance from the origin to the convex hull of `vs` in a space of
/// dimension `dim`.
fn hull_distance(vs: &[Vec<f64>], dim: usize) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if vs.is_empty() {
        return f64::INFINITY;
    }
    match dim {
        1 => {
            let lo = vs.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = vs.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            if lo <= 0.0 && hi >= 0.0 {
                0.0
            } else {
                lo.abs().min(hi.abs())
            }
        }
        2 => {
            if vs.iter().any(|v| v[0] == 0.0 && v[1] == 0.0) {
                return 0.0;
            }
            let mut angles: Vec<f64> = vs.iter().map(|v| v[1].atan2(v[0])).collect();
            angles.sort_by(f64::total_cmp);
            let mut gap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
            for w in angles.windows(2) {
                gap = gap.max(w[1] - w[0]);
            }
            if gap <= PI {
                return 0.0;
            }
            let mut best = vs.iter().map(|v| norm(v)).fold(f64::INFINITY, f64::min);
            for (i, a) in vs.iter().enumerate() {
                for b in &vs[i + 1..] {
                    let d = [b[0] - a[0], b[1] - a[1]];
                    let len2 = d[0] * d[0] + d[1] * d[1];
                    if len2 == 0.0 {
                        continue;
                    }
                    let s = (-(a[0] * d[0] + a[1] * d[1]) / len2).clamp(0.0, 1.0);
                    best = best.min(norm(&[a[0] + s * d[0], a[1] + s * d[1]]));
                }
            }
            best
        }
        _ => {
            // Gilbert's algorithm for the nearest point of a polytope
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let scale = vs.iter().map(|v| norm(v)).fold(0.0, f64::max);
            let mut x = vs[0].clone();
            for _ in 0..10_000 {
                let xx = dot(&x, &x);
                if xx <= (1e-15 * scale).powi(2) {
                    return 0.0;
                }
                let s = vs
                    .iter()
                    .min_by(|a, b| dot(a, &x).total_cmp(&dot(b, &x)))
                    .expect("nonempty");
                if xx - dot(&x, s) <= 1e-14 * xx {
                    break;
                }
                let d: Vec<f64> = s.iter().zip(&x).map(|(a, b)| a - b).collect();
                let lam = (-dot(&x, &d) / dot(&d, &d)).clamp(0.0, 1.0);
                for (xi, di) in x.iter_mut().zip(&d) {
                    *xi += lam * di;
                }
            }
            norm(&x)
        }
    }
}

/// Tests whether each interior image point lies in the convex hull of its
/// neighbours' images. In curved targets the test runs in the tangent space
/// at `f(v)`: the point lies in the geodesic hull exactly when the origin
/// lies in the hull of the log vectors. The residual is the distance from
/// `f(v)` to that hull in the tangent space.
pub fn check_convex_hull(
    k: &DeltaComplex,
    f: &SimplicialMap,
    fixed: &[usize],
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let t = f.target();
    if !t.is_manifold() {
        return Err(VerifyError::Unsupported("convex hulls in metric trees".into()));
    }
    let mut r = CheckResult::new("convex_hull");
    for v in interior_vertices(k, fixed) {
        let p = f.image(v);
        let frame = t.tangent_frame(p)?;
        let mut vs = Vec::new();
        for (_, q) in neighbour_lifts(k, f, v)? {
            let u = t.log(p, &q)?;
            vs.push(frame.iter().map(|b| t.tangent_dot(p, b, &u)).collect::<Vec<f64>>());
        }
        r.observe(hull_distance(&vs, frame.len()), Witness::Vertex(v));
    }
    if !(r.residual <= tol) {
        r.fail(format!("an interior image lies {:e} outside its neighbours' hull", r.residual));
    }
    Ok(r)
}

/// Maximum principle for real-valued maps: interior values stay within the
/// range of the values on `boundary`.
///
/// Interior values within `tol` of the range ends are reported in the notes
/// as ties; a constant map passes with a note that the principle is vacuous.
pub fn check_max_principle(
    k: &DeltaComplex,
    f: &SimplicialMap,
    boundary: &[usize],
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let t = f.target();
    if t.kind() != TargetKind::Euclidean || t.dim() != 1 {
        return Err(VerifyError::Unsupported("the maximum principle needs a real-valued map".into()));
    }
    if boundary.is_empty() {
        return Err(VerifyError::Unsupported("the boundary vertex set is empty".into()));
    }
    let value = |v: usize| f.image(v).0[0];
    let mut r = CheckResult::new("max_principle");
    let all = (0..k.num_vertices()).map(value);
    let spread = all.clone().fold(f64::NEG_INFINITY, f64::max) - all.fold(f64::INFINITY, f64::min);
    if spread <= tol {
        r.notes.push("constant map: the principle is vacuous".into());
        return Ok(r);
    }
    let lo = boundary.iter().map(|&v| value(v)).fold(f64::INFINITY, f64::min);
    let hi = boundary.iter().map(|&v| value(v)).fold(f64::NEG_INFINITY, f64::max);
    let mut ties = Vec::new();
    for v in interior_vertices(k, boundary) {
        let x = value(v);
        r.observe((x - hi).max(lo - x).max(0.0), Witness::Vertex(v));
        if (x - hi).abs() <= tol || (x - lo).abs() <= tol {
            ties.push(v);
        }
    }
    if !ties.is_empty() {
        r.notes.push(format!("interior values within tolerance of the boundary range at {ties:?}"));
    }
    if !(r.residual <= tol) {
        r.fail(format!("an interior value leaves the boundary range [{lo}, {hi}] by {:e}", r.residual));
    }
    Ok(r)
}

/// Area bounds for maps into targets of curvature at most `−a`:
/// `Area ≤ 2π|χ| / a` for harmonic maps of closed surfaces, and on quad
/// meshes `Area ≤ E_S / 2` (pass `l` to enable the second bound).
pub fn check_area_bound(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: Option<&SimplicialMetric>,
    a: f64,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    let mut r = CheckResult::new("area_bound");
    let area = riemannian_area(f, k)?;
    if a > 0.0 {
        let bound = 2.0 * PI * k.euler_characteristic().unsigned_abs() as f64 / a;
        r.residual = r.residual.max(area - bound);
        if area > bound + tol {
            r.fail(format!("area {area} exceeds 2π|χ|/a = {bound}"));
        }
    } else {
        r.notes.push("curvature bound a ≤ 0: the 2π|χ|/a bound is vacuous".into());
    }
    if let Some(l) = l {
        if k.is_quad_mesh() {
            let energy = f.energy(k, l)?;
            if let Some(e) = energy.finite() {
                r.residual = r.residual.max(area - e / 2.0);
                if area > e / 2.0 + tol {
                    r.fail(format!("area {area} exceeds E_S/2 = {}", e / 2.0));
                }
            } else {
                r.notes.push("energy is infinite: the E_S/2 bound is vacuous".into());
            }
        } else {
            r.notes.push("not a quad mesh: the E_S/2 bound is skipped".into());
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Angle sums at least `2π`.
    Immersion,
    /// Angle sums equal to `2π`.
    Embedding,
}

/// Image angle sums at interior vertices.
pub fn check_vertex_angle_sums(
    k: &DeltaComplex,
    f: &SimplicialMap,
    mode: AngleMode,
    tol: f64,
) -> Result<CheckResult, VerifyError> {
    if f.target().model_curvature().is_none() {
        return Err(VerifyError::Unsupported("angles in metric trees".into()));
    }
    let name = match mode {
        AngleMode::Immersion => "angle_sums_immersion",
        AngleMode::Embedding => "angle_sums_embedding",
    };
    let mut r = CheckResult::new(name);
    let corners = (0..k.num_faces())
        .map(|fi| face_corner_angles(f, k, fi))
        .collect::<Result<Vec<_>, _>>()?;
    let boundary = k.boundary_vertices();
    let mut degenerate = Vec::new();
    for v in (0..k.num_vertices()).filter(|v| !boundary.contains(v)) {
        let mut sum = 0.0;
        let mut ok = true;
        for c in k.corners_at(v) {
            match corners[c.face].angles[c.index] {
                Some(a) => sum += a,
                None => ok = false,
            }
        }
        if !ok {
            degenerate.push(v);
            r.witness = Some(Witness::Vertex(v));
            continue;
        }
        let residual = match mode {
            AngleMode::Immersion => (2.0 * PI - sum).max(0.0),
            AngleMode::Embedding => (sum - 2.0 * PI).abs(),
        };
        r.observe(residual, Witness::Vertex(v));
    }
    if !degenerate.is_empty() {
        r.fail(format!("degenerate corners at vertices {degenerate:?}"));
    }
    if !(r.residual <= tol) {
        r.fail(format!("angle sum residual {:e} exceeds {tol:e}", r.residual));
    }
    Ok(r)
}

fn is_identity(f: &SimplicialMap, g: &DeckElement) -> bool {
    g.is_identity() || f.target().decks_equal(g, &DeckElement::Identity, 1e-9)
}

/// First loop edge or pair of edges whose union is a loop with identity
/// deck composition, i.e. a null-homotopic loop of at most two edges.
pub fn good_triangulation_witness(
    k: &DeltaComplex,
    f: &SimplicialMap,
) -> Result<Option<Witness>, VerifyError> {
    let t = f.target();
    for e in 0..k.num_edges() {
        let [a, b] = k.edge(e);
        if a == b && is_identity(f, f.deck(e)) {
            return Ok(Some(Witness::Edge(e)));
        }
    }
    let mut by_ends: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for e in 0..k.num_edges() {
        let [a, b] = k.edge(e);
        by_ends.entry((a.min(b), a.max(b))).or_default().push(e);
    }
    let mut groups: Vec<_> = by_ends.into_iter().collect();
    groups.sort();
    for (_, edges) in groups {
        for (i, &e1) in edges.iter().enumerate() {
            for &e2 in &edges[i + 1..] {
                let (g1, g2) = (f.deck(e1), f.deck(e2));
                let g2_inv = t.deck_inverse(g2)?;
                let [t1, h1] = k.edge(e1);
                let [t2, h2] = k.edge(e2);
                // go out along e1, come back along e2 in whichever direction closes the loop
                let mut returns = Vec::new();
                if t2 == h1 && h2 == t1 {
                    returns.push(g2.clone());
                }
                if t2 == t1 && h2 == h1 {
                    returns.push(g2_inv);
                }
                for back in returns {
                    if is_identity(f, &t.deck_compose(g1, &back)?) {
                        return Ok(Some(Witness::EdgePair(e1, e2)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Signed area proxy of a geodesic triangle in a 2-dimensional target:
/// the cross product in flat models, the determinant of the hyperboloid
/// coordinates in hyperbolic ones.
fn orientation(kind: TargetKind, p: &Point, q: &Point, r: &Point) -> f64 {
    let (p, q, r) = (&p.0, &q.0, &r.0);
    match kind {
        TargetKind::Hyperbolic | TargetKind::Genus2Octagon => {
            p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0])
                + p[2] * (q[0] * r[1] - q[1] * r[0])
        }
        _ => (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]),
    }
}

/// Numerical embedding check for maps of surfaces into 2-dimensional
/// targets: positive image edge lengths, consistently oriented
/// nondegenerate image triangles, angle sums `2π` within `tol` at interior
/// vertices, and no loop of one or two edges with trivial deck element.
///
/// This verifies the local picture of a homeomorphism; it is not a
/// topological certificate.
pub fn check_embedding(k: &DeltaComplex, f: &SimplicialMap, tol: f64) -> Result<CheckResult, VerifyError> {
    let t = f.target();
    if !t.is_manifold() || t.dim() != 2 {
        return Err(VerifyError::Unsupported("embedding checks need a surface target".into()));
    }
    let mut r = CheckResult::new("embedding");
    let lengths = f.edge_lengths(k);
    if let Some(e) = (0..lengths.len()).find(|&e| lengths[e] <= ZERO_IMAGE_TOL) {
        r.witness = Some(Witness::Edge(e));
        r.fail(format!("edge {e} has an image of length {:e}", lengths[e]));
    }
    let mut sign = 0.0;
    'faces: for fi in 0..k.num_faces() {
        let lift = f.face_lift(k, fi, k.preferred_corner(fi))?;
        for j in 1..lift.len() - 1 {
            let o = orientation(t.kind(), &lift[0], &lift[j], &lift[j + 1]);
            let scale = [&lift[0], &lift[j], &lift[j + 1]]
                .iter()
                .map(|p| p.0.iter().map(|x| x.abs()).fold(0.0, f64::max))
                .product::<f64>();
            if o.abs() <= 1e-12 * scale {
                r.witness.get_or_insert(Witness::Face(fi));
                r.fail(format!("face {fi} has a degenerate image triangle"));
                break 'faces;
            }
            if sign == 0.0 {
                sign = o.signum();
            } else if o.signum() != sign {
                r.witness.get_or_insert(Witness::Face(fi));
                r.fail(format!("face {fi} is folded over"));
                break 'faces;
            }
        }
    }
    let angles = check_vertex_angle_sums(k, f, AngleMode::Embedding, tol)?;
    r.residual = angles.residual;
    if !angles.pass {
        if r.witness.is_none() {
            r.witness = angles.witness;
        }
        r.pass = false;
        r.notes.extend(angles.notes);
    }
    if let Some(w) = good_triangulation_witness(k, f)? {
        r.witness.get_or_insert(w);
        r.fail(format!("{w:?} closes a null-homotopic loop"));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dirichlet_disk, torus_identity};
    use crate::solver::{flow_to_harmonic, FlowConfig};
    use crate::targets::{make_target, TargetSpec};

    fn wheel() -> (DeltaComplex, SimplicialMetric) {
        // centre 0, rim 1..=4
        let mut edges: Vec<[usize; 2]> = (1..=4).map(|i| [0, i]).collect();
        edges.extend((1..=4).map(|i| [i, i % 4 + 1]));
        let faces: Vec<Vec<(usize, i8)>> =
            (0..4).map(|i| vec![(i, 1), (4 + i, 1), ((i + 1) % 4, -1)]).collect();
        let k = DeltaComplex::from_lists(&edges, &faces).unwrap();
        let mut lengths = vec![1.0; 4];
        lengths.extend([2f64.sqrt(); 4]);
        (k, SimplicialMetric::new(lengths).unwrap())
    }

    fn plane_map(k: &DeltaComplex, pts: &[[f64; 2]]) -> SimplicialMap {
        let t = make_target(&TargetSpec::Euclidean { dim: 2 }).unwrap();
        let images = pts.iter().map(|p| Point(p.to_vec())).collect();
        SimplicialMap::with_identity_decks(k, t, images).unwrap()
    }

    const SQUARE: [[f64; 2]; 5] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];

    #[test]
    fn isometric_map_is_an_equality_case() {
        let (k, l) = wheel();
        let f = plane_map(&k, &SQUARE);
        let r = check_e_ge_a(&k, &f, &l, 1e-9).unwrap();
        assert!(r.pass && r.residual == 0.0, "{r:?}");
    }

    #[test]
    fn centre_of_square_is_the_mean() {
        let (k, l) = wheel();
        let f = plane_map(&k, &SQUARE);
        assert!(check_mean_value(&k, &f, &l, &[], 1e-12).unwrap().pass);
        let mut off = SQUARE;
        off[0] = [0.25, 0.0];
        let r = check_mean_value(&k, &plane_map(&k, &off), &l, &[], 1e-12).unwrap();
        assert!(!r.pass);
        assert!((r.residual - 0.25).abs() < 1e-12);
        assert_eq!(r.witness, Some(Witness::Vertex(0)));
    }

    #[test]
    fn hull_test_in_the_plane() {
        let (k, _) = wheel();
        assert!(check_convex_hull(&k, &plane_map(&k, &SQUARE), &[], 0.0).unwrap().pass);
        let mut out = SQUARE;
        out[0] = [2.0, 0.0];
        let r = check_convex_hull(&k, &plane_map(&k, &out), &[], 1e-12).unwrap();
        assert!(!r.pass);
        assert!((r.residual - 1.0).abs() < 1e-12);
        let constant = plane_map(&k, &[[0.3, 0.3]; 5]);
        assert!(check_convex_hull(&k, &constant, &[], 0.0).unwrap().pass);
    }

    #[test]
    fn hull_distance_in_three_dimensions() {
        let vs = vec![vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0], vec![1.0, 0.0, -1.0]];
        assert!((hull_distance(&vs, 3) - 1.0).abs() < 1e-9);
        let around = vec![
            vec![1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0],
        ];
        assert!(hull_distance(&around, 3) < 1e-12);
    }

    #[test]
    fn max_principle_cases() {
        let (k, _) = wheel();
        let t = make_target(&TargetSpec::Euclidean { dim: 1 }).unwrap();
        let rim = [1, 2, 3, 4];
        let real = |vals: [f64; 5]| {
            SimplicialMap::with_identity_decks(&k, t.clone(), vals.iter().map(|&x| Point(vec![x])).collect())
                .unwrap()
        };
        let r = check_max_principle(&k, &real([0.0, 1.0, 0.0, -1.0, 0.0]), &rim, 1e-9).unwrap();
        assert!(r.pass && r.notes.is_empty());
        let r = check_max_principle(&k, &real([2.0; 5]), &rim, 1e-9).unwrap();
        assert!(r.pass && r.notes[0].contains("vacuous"));
        let r = check_max_principle(&k, &real([3.0, 1.0, 0.0, -1.0, 0.0]), &rim, 1e-9).unwrap();
        assert!(!r.pass && r.residual == 2.0);
    }

    #[test]
    fn torus_identity_angles_and_embedding() {
        let inst = torus_identity();
        let r = check_vertex_angle_sums(&inst.complex, &inst.map, AngleMode::Embedding, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        let r = check_embedding(&inst.complex, &inst.map, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn collapsed_edge_fails_the_embedding_check() {
        let (k, _) = wheel();
        let mut pts = SQUARE;
        pts[0] = pts[1];
        let r = check_embedding(&k, &plane_map(&k, &pts), 1e-9).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness, Some(Witness::Edge(0)));
        let angles = check_vertex_angle_sums(&k, &plane_map(&k, &pts), AngleMode::Immersion, 1e-9).unwrap();
        assert!(!angles.pass && angles.notes[0].contains("degenerate"));
    }

    #[test]
    fn folded_map_fails_the_embedding_check() {
        let (k, _) = wheel();
        let mut pts = SQUARE;
        pts[1] = [-2.0, 0.5];
        let r = check_embedding(&k, &plane_map(&k, &pts), 1e-9).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn trivial_loop_breaks_good_triangulation() {
        let inst = torus_identity();
        assert_eq!(good_triangulation_witness(&inst.complex, &inst.map).unwrap(), None);
        let t = inst.map.target().clone();
        let decks = vec![
            DeckElement::Translation(vec![1, 0]),
            DeckElement::Translation(vec![1, 0]),
            DeckElement::Translation(vec![2, 0]),
        ];
        let f = SimplicialMap::new(&inst.complex, t, inst.map.images().to_vec(), decks).unwrap();
        assert_eq!(
            good_triangulation_witness(&inst.complex, &f).unwrap(),
            Some(Witness::EdgePair(0, 1))
        );
    }

    #[test]
    fn flowed_disk_passes_hull_and_mean_value() {
        let inst = dirichlet_disk(5, 0.1);
        let cfg = FlowConfig {
            fixed_vertices: inst.fixed.clone(),
            ..FlowConfig::default()
        };
        let (g, rep) = flow_to_harmonic(&inst.complex, &inst.map, &inst.metric, &cfg).unwrap();
        assert!(rep.converged());
        let mv = check_mean_value(&inst.complex, &g, &inst.metric, &inst.fixed, 10.0 * cfg.grad_tol).unwrap();
        assert!(mv.pass, "{mv:?}");
        assert!(check_convex_hull(&inst.complex, &g, &inst.fixed, 0.0).unwrap().pass);
    }

    #[test]
    fn area_bound_on_a_constant_map() {
        let inst = torus_identity();
        let t = make_target(&TargetSpec::Hyperbolic { dim: 2 }).unwrap();
        let f = SimplicialMap::constant(&inst.complex, t, Point(vec![1.0, 0.0, 0.0])).unwrap();
        let r = check_area_bound(&inst.complex, &f, None, 1.0, 0.0).unwrap();
        assert!(r.pass && r.residual == 0.0);
    }
}

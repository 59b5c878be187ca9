//! Energy gradient and descent flows toward simplicial harmonic maps.
//!
//! The flow is a discrete descent. Each iteration picks a direction per
//! free vertex, either the gradient scaled by `1 / (2 Σ w)` at the vertex
//! or a limited-memory quasi-Newton direction built from the same scaling,
//! and moves along geodesics `exp_p(t · d)` with `t` chosen by backtracking
//! until the energy drops by a sufficient margin. Energy changes are
//! computed edge by edge from the vertex displacements, which keeps them
//! accurate long after they fall below the rounding error of the total.
//! Edges of zero domain length bind their endpoints into rigid clusters that
//! move as one point.

mod family;
mod metric_opt;
mod uniqueness;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::DeltaComplex;
use crate::metric::{neighbour_sum, MetricError, SimplicialMetric};
use crate::smap::{corner_energy, riemannian_area, Energy, MapError, SimplicialMap};
use crate::targets::hyperbolic::minkowski_dot;
use crate::targets::{DeckElement, Point, SharedTarget, TangentVector, TargetError, TargetKind};

pub use family::{flow_family, FamilyReport, FamilySample};
pub use metric_opt::{minimize_over_metrics, MetricOptReport, MetricOptStep};
pub use uniqueness::{gauge_alignment, uniqueness_probe, UniquenessReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("the map has infinite energy")]
    InfiniteEnergy,
    #[error("gradients are not defined for metric tree targets")]
    TreeTarget,
    #[error("invalid flow configuration: {0}")]
    Config(String),
    #[error("fixed vertex {0} does not exist")]
    FixedVertex(usize),
    #[error("refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Target(#[from] TargetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Scaled gradient steps.
    Gradient,
    /// Limited-memory BFGS on the product of the vertex targets, with the
    /// scaled gradient as initial inverse Hessian.
    Lbfgs,
}

/// Parameters of the descent flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// Stop once the largest per-vertex gradient norm is at most this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Largest trial step of a line search.
    pub initial_step: f64,
    pub shrink: f64,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Line searches giving up below this step report a stall.
    pub min_step: f64,
    /// Vertices held in place (Dirichlet data).
    pub fixed_vertices: Vec<usize>,
    pub method: Method,
    /// Number of stored step pairs for `Method::Lbfgs`.
    pub memory: usize,
    /// Record the Riemannian image area with every trace entry.
    pub record_area: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iters: 100_000,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            min_step: 1e-16,
            fixed_vertices: Vec::new(),
            method: Method::Lbfgs,
            memory: 8,
            record_area: false,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("initial_step", self.initial_step),
            ("armijo", self.armijo),
            ("min_step", self.min_step),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(SolverError::Config(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(SolverError::Config(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        if self.armijo >= 1.0 {
            return Err(SolverError::Config(format!("armijo must be below 1, got {}", self.armijo)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    InfiniteEnergy,
    /// The line search found no acceptable step above `min_step`.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowRecord {
    pub iteration: usize,
    /// Initial energy plus the accumulated per-step changes.
    pub energy: f64,
    pub grad_norm: f64,
    /// Step accepted to reach this state (0 for the initial state).
    pub step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub termination: Termination,
    pub iterations: usize,
    /// Energy of the returned map, evaluated directly.
    pub final_energy: f64,
    pub final_grad_norm: f64,
    pub trace: Vec<FlowRecord>,
}

impl FlowReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// True when no trace entry exceeds its predecessor.
    pub fn is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].energy <= w[0].energy)
    }
}

/// Result of a single descent step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepOutcome {
    pub energy_before: f64,
    pub energy_after: f64,
    pub grad_norm: f64,
    /// Accepted step, 0 if the map did not move.
    pub step: f64,
    pub status: StepStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Moved,
    /// Gradient already zero, or the energy is zero.
    Critical,
    Stalled,
}

/// Vertices glued by zero-length edges. Member `v` of a cluster sits at
/// `offset[v] · p(root)`.
#[derive(Clone, Debug)]
struct Clusters {
    members: Vec<Vec<usize>>,
    offset: Vec<DeckElement>,
    offset_inv: Vec<DeckElement>,
    free: Vec<bool>,
}

impl Clusters {
    fn root(&self, c: usize) -> usize {
        self.members[c][0]
    }
}

/// One tangent vector per cluster, at the cluster root.
type Field = Vec<TangentVector>;

/// Precomputed data of one flow problem.
struct Problem<'a> {
    k: &'a DeltaComplex,
    t: &'a SharedTarget,
    l: &'a [f64],
    decks: &'a [DeckElement],
    inv_decks: Vec<DeckElement>,
    weights: Vec<f64>,
    clusters: Clusters,
    /// `1 / (2 Σ w)` per cluster, zero for fixed or weightless clusters.
    scaling: Vec<f64>,
    flat: bool,
}

fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (y, xi) in acc.iter_mut().zip(x) {
        *y += a * xi;
    }
}

impl<'a> Problem<'a> {
    fn new(
        k: &'a DeltaComplex,
        f: &'a SimplicialMap,
        l: &'a SimplicialMetric,
        fixed: &[usize],
    ) -> Result<Self, SolverError> {
        l.check_count(k)?;
        let t = f.target();
        if !t.is_manifold() {
            return Err(SolverError::TreeTarget);
        }
        if let Some(&v) = fixed.iter().find(|&&v| v >= k.num_vertices()) {
            return Err(SolverError::FixedVertex(v));
        }
        let lengths = l.lengths();
        let weights: Vec<f64> = (0..k.num_edges())
            .map(|e| {
                if lengths[e] > 0.0 {
                    neighbour_sum(k, lengths, e) / (2.0 * lengths[e])
                } else {
                    0.0
                }
            })
            .collect();
        let inv_decks = f
            .decks()
            .iter()
            .map(|g| if g.is_identity() { Ok(g.clone()) } else { t.deck_inverse(g) })
            .collect::<Result<Vec<_>, _>>()?;
        let clusters = build_clusters(k, t, lengths, f.decks(), fixed)?;
        let scaling = clusters
            .members
            .iter()
            .zip(&clusters.free)
            .map(|(members, &free)| {
                let w: f64 = members
                    .iter()
                    .map(|&v| {
                        k.vertex_edges(v)
                            .iter()
                            .map(|&e| {
                                let [a, b] = k.edge(e);
                                weights[e] * (usize::from(a == v) + usize::from(b == v)) as f64
                            })
                            .sum::<f64>()
                    })
                    .sum();
                if free && w > 0.0 {
                    0.5 / w
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            k,
            t,
            l: lengths,
            decks: f.decks(),
            inv_decks,
            weights,
            clusters,
            scaling,
            flat: matches!(t.kind(), TargetKind::Euclidean | TargetKind::FlatTorus),
        })
    }

    fn apply(&self, g: &DeckElement, p: &Point) -> Point {
        if g.is_identity() {
            p.clone()
        } else {
            self.t.deck_apply(g, p).expect("decks validated with the map")
        }
    }

    fn image_lengths(&self, images: &[Point]) -> Vec<f64> {
        (0..self.k.num_edges())
            .map(|e| {
                let [tail, head] = self.k.edge(e);
                self.t.distance(&images[tail], &self.apply(&self.decks[e], &images[head]))
            })
            .collect()
    }

    fn energy(&self, images: &[Point]) -> Energy {
        corner_energy(self.k, self.l, &self.image_lengths(images))
    }

    /// Gradient of the edge-sum form at every vertex.
    fn raw_gradient(&self, images: &[Point]) -> Result<Vec<TangentVector>, TargetError> {
        let mut grad: Vec<TangentVector> = vec![vec![0.0; self.t.ambient_dim()]; images.len()];
        for e in 0..self.k.num_edges() {
            let w = self.weights[e];
            if w == 0.0 {
                continue;
            }
            let [tail, head] = self.k.edge(e);
            let q_tail = self.apply(&self.decks[e], &images[head]);
            let q_head = self.apply(&self.inv_decks[e], &images[tail]);
            let log_t = self.t.log(&images[tail], &q_tail)?;
            axpy(&mut grad[tail], -2.0 * w, &log_t);
            let log_h = self.t.log(&images[head], &q_head)?;
            axpy(&mut grad[head], -2.0 * w, &log_h);
        }
        Ok(grad)
    }

    /// Gradient of each cluster, expressed at its root; zero when fixed.
    fn gradient(&self, images: &[Point]) -> Result<Field, TargetError> {
        let raw = self.raw_gradient(images)?;
        let c = &self.clusters;
        let dim = self.t.ambient_dim();
        c.members
            .iter()
            .enumerate()
            .map(|(ci, members)| {
                let mut g = vec![0.0; dim];
                if !c.free[ci] {
                    return Ok(g);
                }
                for &v in members {
                    if c.offset_inv[v].is_identity() {
                        axpy(&mut g, 1.0, &raw[v]);
                    } else {
                        let moved = self.t.deck_apply_vector(&c.offset_inv[v], &raw[v])?;
                        axpy(&mut g, 1.0, &moved);
                    }
                }
                Ok(g)
            })
            .collect()
    }

    fn dot(&self, images: &[Point], a: &Field, b: &Field) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(ci, (x, y))| self.t.tangent_dot(&images[self.clusters.root(ci)], x, y))
            .sum()
    }

    fn grad_norm(&self, images: &[Point], grad: &Field) -> f64 {
        grad.iter()
            .enumerate()
            .map(|(ci, g)| self.t.tangent_norm(&images[self.clusters.root(ci)], g))
            .fold(0.0, f64::max)
    }

    fn scaled(&self, field: &Field, factor: f64) -> Field {
        field
            .iter()
            .zip(&self.scaling)
            .map(|(g, &s)| g.iter().map(|x| factor * s * x).collect())
            .collect()
    }

    /// Images after moving every free cluster root by `exp(step · d)`.
    fn moved(&self, images: &[Point], dirs: &Field, step: f64) -> Result<Vec<Point>, TargetError> {
        let c = &self.clusters;
        let mut out = images.to_vec();
        for (ci, members) in c.members.iter().enumerate() {
            if !c.free[ci] || dirs[ci].iter().all(|&x| x == 0.0) {
                continue;
            }
            let root = members[0];
            let v: Vec<f64> = dirs[ci].iter().map(|x| step * x).collect();
            let new_root = self.t.exp(&images[root], &v)?;
            for &m in &members[1..] {
                out[m] = self.apply(&c.offset[m], &new_root);
            }
            out[root] = new_root;
        }
        Ok(out)
    }

    /// `d(p2, q2)² − d(p, q)²` from the displacements `dp = p2 − p` and
    /// `dq = q2 − q`, without cancellation between the two squares.
    fn square_change(&self, p: &Point, q: &Point, p2: &Point, q2: &Point, dp: &[f64], dq: &[f64], len: f64) -> f64 {
        if self.flat {
            // with u = q − p: |u + du|² − |u|² = <du, 2u + du>
            return (0..dp.len())
                .map(|i| {
                    let du = dq[i] - dp[i];
                    du * (2.0 * (q.0[i] - p.0[i]) + du)
                })
                .sum();
        }
        let len2 = self.t.distance(p2, q2);
        let s = len + len2;
        if s < 1e-6 {
            return len2 * len2 - len * len;
        }
        // cosh d = −<p, q>, and cosh d2 − cosh d = 2 sinh(s/2) sinh((d2 − d)/2)
        let dc = -(minkowski_dot(dp, &q2.0) + minkowski_dot(&p.0, dq));
        let delta = 2.0 * (dc / (2.0 * (0.5 * s).sinh())).asinh();
        delta * (2.0 * len + delta)
    }

    /// Energy change from `old` to `new`, summed edge by edge in the
    /// edge-weight form.
    /// Smallest energy change that can be told apart from rounding in the
    /// stored coordinates near `images`. Zero for flat targets, where the
    /// change is computed from displacements alone.
    fn resolution(&self, images: &[Point]) -> f64 {
        if self.flat {
            return 0.0;
        }
        let scale = |p: &Point| p.0.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let total: f64 = (0..self.k.num_edges())
            .map(|e| {
                let [tail, head] = self.k.edge(e);
                let q = self.apply(&self.decks[e], &images[head]);
                self.weights[e] * scale(&images[tail]) * scale(&q)
            })
            .sum();
        f64::EPSILON * total / 16.0
    }

    fn energy_change(&self, old: &[Point], new: &[Point], lengths: &[f64]) -> Result<f64, TargetError> {
        let disp: Vec<Option<Vec<f64>>> = old
            .iter()
            .zip(new)
            .map(|(a, b)| (a != b).then(|| b.0.iter().zip(&a.0).map(|(x, y)| x - y).collect()))
            .collect();
        let zero = vec![0.0; self.t.ambient_dim()];
        let mut total = 0.0;
        for e in 0..self.k.num_edges() {
            let w = self.weights[e];
            let [tail, head] = self.k.edge(e);
            if w == 0.0 || (disp[tail].is_none() && disp[head].is_none()) {
                continue;
            }
            let g = &self.decks[e];
            let dp = disp[tail].as_deref().unwrap_or(&zero);
            let dq = match &disp[head] {
                None => zero.clone(),
                Some(d) if g.is_identity() => d.clone(),
                Some(d) => self.t.deck_apply_vector(g, d)?,
            };
            let (q, q2) = (self.apply(g, &old[head]), self.apply(g, &new[head]));
            total += w * self.square_change(&old[tail], &q, &new[tail], &q2, dp, &dq, lengths[e]);
        }
        Ok(total)
    }

    /// Parallel transport of a field from the roots in `old` to those in
    /// `new`.
    fn transport(&self, old: &[Point], new: &[Point], field: &Field) -> Result<Field, TargetError> {
        field
            .iter()
            .enumerate()
            .map(|(ci, v)| {
                let r = self.clusters.root(ci);
                if old[r] == new[r] || v.iter().all(|&x| x == 0.0) {
                    Ok(v.clone())
                } else {
                    self.t.parallel_transport(&old[r], &new[r], v)
                }
            })
            .collect()
    }

    /// Velocity at the new roots of the geodesics from the old ones.
    fn arrival(&self, old: &[Point], new: &[Point]) -> Result<Field, TargetError> {
        (0..self.clusters.members.len())
            .map(|ci| {
                let r = self.clusters.root(ci);
                if old[r] == new[r] {
                    Ok(vec![0.0; self.t.ambient_dim()])
                } else {
                    Ok(self.t.log(&new[r], &old[r])?.iter().map(|x| -x).collect())
                }
            })
            .collect()
    }
}

fn build_clusters(
    k: &DeltaComplex,
    t: &SharedTarget,
    l: &[f64],
    decks: &[DeckElement],
    fixed: &[usize],
) -> Result<Clusters, TargetError> {
    let nv = k.num_vertices();
    let fixed: BTreeSet<usize> = fixed.iter().copied().collect();
    let mut cluster_of = vec![usize::MAX; nv];
    let mut offset = vec![DeckElement::Identity; nv];
    let mut members = Vec::new();
    for start in 0..nv {
        if cluster_of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        cluster_of[start] = id;
        let mut list = vec![start];
        let mut i = 0;
        while i < list.len() {
            let v = list[i];
            i += 1;
            for &e in k.vertex_edges(v) {
                if l[e] != 0.0 {
                    continue;
                }
                let [tail, head] = k.edge(e);
                // p(tail) = g_e · p(head)
                let (other, off) = if tail == v && head != v {
                    let g_inv = t.deck_inverse(&decks[e])?;
                    (head, t.deck_compose(&g_inv, &offset[v])?)
                } else if head == v && tail != v {
                    (tail, t.deck_compose(&decks[e], &offset[v])?)
                } else {
                    continue;
                };
                if cluster_of[other] == usize::MAX {
                    cluster_of[other] = id;
                    offset[other] = off;
                    list.push(other);
                }
            }
        }
        members.push(list);
    }
    let offset_inv = offset
        .iter()
        .map(|g| if g.is_identity() { Ok(g.clone()) } else { t.deck_inverse(g) })
        .collect::<Result<Vec<_>, _>>()?;
    let free = members
        .iter()
        .map(|m: &Vec<usize>| m.iter().all(|v| !fixed.contains(v)))
        .collect();
    Ok(Clusters {
        members,
        offset,
        offset_inv,
        free,
    })
}


fn finite_energy(e: Energy) -> Result<f64, SolverError> {
    e.finite().ok_or(SolverError::InfiniteEnergy)
}

/// Gradient of the simplicial energy at every vertex, as an ambient tangent
/// vector at the vertex image: `Σ 2 w_e (-log_{p(v)} q_e)` over incident
/// edges of positive length, `q_e` being the other endpoint's lift.
pub fn energy_gradient(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: &SimplicialMetric,
) -> Result<Vec<TangentVector>, SolverError> {
    let p = Problem::new(k, f, l, &[])?;
    finite_energy(p.energy(f.images()))?;
    Ok(p.raw_gradient(f.images())?)
}

/// Central finite differences of the energy along an orthonormal frame at
/// every vertex, with step `h`.
pub fn finite_diff_gradient(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: &SimplicialMetric,
    h: f64,
) -> Result<Vec<TangentVector>, SolverError> {
    let p = Problem::new(k, f, l, &[])?;
    let t = f.target();
    let mut images = f.images().to_vec();
    let mut grad = Vec::with_capacity(images.len());
    for v in 0..images.len() {
        let base = images[v].clone();
        let mut g = vec![0.0; t.ambient_dim()];
        for u in t.tangent_frame(&base)? {
            let plus: Vec<f64> = u.iter().map(|x| h * x).collect();
            let minus: Vec<f64> = u.iter().map(|x| -h * x).collect();
            images[v] = t.exp(&base, &plus)?;
            let e_plus = finite_energy(p.energy(&images))?;
            images[v] = t.exp(&base, &minus)?;
            let e_minus = finite_energy(p.energy(&images))?;
            axpy(&mut g, (e_plus - e_minus) / (2.0 * h), &u);
        }
        images[v] = base;
        grad.push(g);
    }
    Ok(grad)
}

struct Accepted {
    images: Vec<Point>,
    change: f64,
    step: f64,
}

/// Backtracking along `dirs` from `images`; `None` if no step down to
/// `cfg.min_step` decreases the energy enough, or once the predicted
/// decrease drops below `floor`.
fn line_search(
    p: &Problem<'_>,
    images: &[Point],
    lengths: &[f64],
    dirs: &Field,
    slope: f64,
    cfg: &FlowConfig,
    first_step: f64,
    floor: f64,
) -> Result<Option<Accepted>, SolverError> {
    let mut step = first_step;
    while step >= cfg.min_step && -step * slope >= floor {
        let trial = p.moved(images, dirs, step)?;
        let change = p.energy_change(images, &trial, lengths)?;
        if change <= cfg.armijo * step * slope && change < 0.0 {
            return Ok(Some(Accepted {
                images: trial,
                change,
                step,
            }));
        }
        step *= cfg.shrink;
    }
    Ok(None)
}

/// Limited-memory BFGS state: step and gradient-change pairs, kept at the
/// current cluster roots.
struct Memory {
    pairs: VecDeque<(Field, Field, f64)>,
    capacity: usize,
}

impl Memory {
    fn direction(&self, p: &Problem<'_>, images: &[Point], grad: &Field) -> Field {
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * p.dot(images, s, &q);
            for (qc, yc) in q.iter_mut().zip(y) {
                axpy(qc, -a, yc);
            }
            alphas.push(a);
        }
        let gamma = match self.pairs.back() {
            Some((s, y, _)) => {
                let dy = p.scaled(y, 1.0);
                let yhy = p.dot(images, y, &dy);
                if yhy > 0.0 {
                    p.dot(images, s, y) / yhy
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let mut r = p.scaled(&q, gamma);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * p.dot(images, y, &r);
            for (rc, sc) in r.iter_mut().zip(s) {
                axpy(rc, a - b, sc);
            }
        }
        r.iter().map(|v| v.iter().map(|x| -x).collect()).collect()
    }

    fn update(
        &mut self,
        p: &Problem<'_>,
        old: &[Point],
        new: &[Point],
        old_grad: &Field,
        new_grad: &Field,
    ) -> Result<(), TargetError> {
        for (s, y, _) in self.pairs.iter_mut() {
            *s = p.transport(old, new, s)?;
            *y = p.transport(old, new, y)?;
        }
        let s = p.arrival(old, new)?;
        let carried = p.transport(old, new, old_grad)?;
        let y: Field = new_grad
            .iter()
            .zip(&carried)
            .map(|(a, b)| a.iter().zip(b).map(|(x, z)| x - z).collect())
            .collect();
        let sy = p.dot(new, &s, &y);
        let scale = (p.dot(new, &s, &s) * p.dot(new, &y, &y)).sqrt();
        if sy > 1e-12 * scale && self.capacity > 0 {
            if self.pairs.len() == self.capacity {
                self.pairs.pop_front();
            }
            self.pairs.push_back((s, y, 1.0 / sy));
        }
        Ok(())
    }
}

/// One scaled-gradient step with backtracking.
pub fn flow_step(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: &SimplicialMetric,
    cfg: &FlowConfig,
) -> Result<(SimplicialMap, StepOutcome), SolverError> {
    cfg.validate()?;
    let p = Problem::new(k, f, l, &cfg.fixed_vertices)?;
    let energy = finite_energy(p.energy(f.images()))?;
    let grad = p.gradient(f.images())?;
    let grad_norm = p.grad_norm(f.images(), &grad);
    let unchanged = |status| StepOutcome {
        energy_before: energy,
        energy_after: energy,
        grad_norm,
        step: 0.0,
        status,
    };
    if energy == 0.0 || grad_norm == 0.0 {
        return Ok((f.clone(), unchanged(StepStatus::Critical)));
    }
    let dirs = p.scaled(&grad, -1.0);
    let slope = p.dot(f.images(), &grad, &dirs);
    let lengths = p.image_lengths(f.images());
    match line_search(&p, f.images(), &lengths, &dirs, slope, cfg, cfg.initial_step, p.resolution(f.images()))? {
        Some(acc) => Ok((
            f.with_images_unchecked(acc.images),
            StepOutcome {
                energy_before: energy,
                energy_after: energy + acc.change,
                grad_norm,
                step: acc.step,
                status: StepStatus::Moved,
            },
        )),
        None => Ok((f.clone(), unchanged(StepStatus::Stalled))),
    }
}

/// Runs the descent flow until the gradient is below `cfg.grad_tol`.
///
/// Decks are never modified, so the homotopy class is preserved. A map of
/// zero energy is returned unchanged, whatever its target.
pub fn flow_to_harmonic(
    k: &DeltaComplex,
    f: &SimplicialMap,
    l: &SimplicialMetric,
    cfg: &FlowConfig,
) -> Result<(SimplicialMap, FlowReport), SolverError> {
    cfg.validate()?;
    if f.energy(k, l)?.value() == 0.0 {
        let area = if cfg.record_area { Some(riemannian_area(f, k)?) } else { None };
        let report = FlowReport {
            termination: Termination::Converged,
            iterations: 0,
            final_energy: 0.0,
            final_grad_norm: 0.0,
            trace: vec![FlowRecord {
                iteration: 0,
                energy: 0.0,
                grad_norm: 0.0,
                step: 0.0,
                area,
            }],
        };
        return Ok((f.clone(), report));
    }
    let p = Problem::new(k, f, l, &cfg.fixed_vertices)?;
    let area = |images: &[Point]| -> Result<Option<f64>, SolverError> {
        if cfg.record_area {
            Ok(Some(riemannian_area(&f.with_images_unchecked(images.to_vec()), k)?))
        } else {
            Ok(None)
        }
    };
    let mut images = f.images().to_vec();
    let mut energy = finite_energy(p.energy(&images))?;
    let mut lengths = p.image_lengths(&images);
    let mut grad = p.gradient(&images)?;
    let mut grad_norm = p.grad_norm(&images, &grad);
    let mut trace = vec![FlowRecord {
        iteration: 0,
        energy,
        grad_norm,
        step: 0.0,
        area: area(&images)?,
    }];
    let mut memory = Memory {
        pairs: VecDeque::new(),
        capacity: if cfg.method == Method::Lbfgs { cfg.memory } else { 0 },
    };
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    let termination = loop {
        if energy == 0.0 || grad_norm <= cfg.grad_tol {
            break Termination::Converged;
        }
        if iterations >= cfg.max_iters {
            break Termination::MaxIters;
        }
        let mut dirs = memory.direction(&p, &images, &grad);
        let mut slope = p.dot(&images, &grad, &dirs);
        if !memory.pairs.is_empty() && !(slope < 0.0) {
            memory.pairs.clear();
            dirs = memory.direction(&p, &images, &grad);
            slope = p.dot(&images, &grad, &dirs);
        }
        let first = if memory.pairs.is_empty() {
            (2.0 * step).min(cfg.initial_step)
        } else {
            cfg.initial_step
        };
        let found = if slope < 0.0 {
            line_search(&p, &images, &lengths, &dirs, slope, cfg, first, p.resolution(&images))?
        } else {
            None
        };
        let Some(acc) = found else {
            if !memory.pairs.is_empty() {
                memory.pairs.clear();
                continue;
            }
            break Termination::Stalled;
        };
        assert!(acc.change < 0.0, "accepted step raised the energy by {}", acc.change);
        let new_grad = p.gradient(&acc.images)?;
        memory.update(&p, &images, &acc.images, &grad, &new_grad)?;
        iterations += 1;
        images = acc.images;
        energy += acc.change;
        step = acc.step;
        lengths = p.image_lengths(&images);
        grad = new_grad;
        grad_norm = p.grad_norm(&images, &grad);
        trace.push(FlowRecord {
            iteration: iterations,
            energy,
            grad_norm,
            step,
            area: area(&images)?,
        });
    };
    let final_energy = finite_energy(p.energy(&images))?;
    let map = if iterations == 0 {
        f.clone()
    } else {
        f.with_images_unchecked(images)
    };
    Ok((
        map,
        FlowReport {
            termination,
            iterations,
            final_energy,
            final_grad_norm: grad_norm,
            trace,
        },
    ))
}

/// Largest distance between corresponding vertex images of two maps.
pub fn max_vertex_distance(a: &SimplicialMap, b: &SimplicialMap) -> (f64, usize) {
    a.images()
        .iter()
        .zip(b.images())
        .enumerate()
        .map(|(v, (p, q))| (a.target().distance(p, q), v))
        .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{make_target, TargetSpec};

    fn star(n: usize) -> DeltaComplex {
        let mut edges: Vec<[usize; 2]> = (0..n).map(|i| [0, i + 1]).collect();
        edges.extend((0..n).map(|i| [i + 1, (i + 1) % n + 1]));
        let faces: Vec<Vec<(usize, i8)>> =
            (0..n).map(|i| vec![(i, 1), (n + i, 1), ((i + 1) % n, -1)]).collect();
        DeltaComplex::from_lists(&edges, &faces).unwrap()
    }

    fn euclid() -> SharedTarget {
        make_target(&TargetSpec::Euclidean { dim: 2 }).unwrap()
    }

    fn ring_images(n: usize, centre: [f64; 2]) -> Vec<Point> {
        let mut images = vec![Point(centre.to_vec())];
        for i in 0..n {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            images.push(Point(vec![a.cos(), a.sin()]));
        }
        images
    }

    #[test]
    fn star_gradient_matches_differences_and_closed_form() {
        let k = star(4);
        let f = SimplicialMap::with_identity_decks(&k, euclid(), ring_images(4, [0.3, 0.1])).unwrap();
        let l = SimplicialMetric::uniform(k.num_edges(), 1.0).unwrap();
        let g = energy_gradient(&k, &f, &l).unwrap();
        let fd = finite_diff_gradient(&k, &f, &l, 1e-5).unwrap();
        for (a, b) in g.iter().zip(&fd) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-6 * (1.0 + x.abs()), "{x} vs {y}");
            }
        }
        // with unit lengths a spoke has neighbour sum 4, hence weight 2, and
        // the centre's gradient is 2 · 2 Σ (p − q)
        let expected: Vec<f64> = (0..2)
            .map(|c| 4.0 * (1..=4).map(|j| f.image(0).0[c] - f.image(j).0[c]).sum::<f64>())
            .collect();
        for (x, y) in g[0].iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_star_reaches_centroid_in_one_step() {
        let n = 6;
        let k = star(n);
        let f = SimplicialMap::with_identity_decks(&k, euclid(), ring_images(n, [0.4, -0.2])).unwrap();
        let l = SimplicialMetric::uniform(k.num_edges(), 1.0).unwrap();
        let cfg = FlowConfig {
            fixed_vertices: (1..=n).collect(),
            ..FlowConfig::default()
        };
        let (g, out) = flow_step(&k, &f, &l, &cfg).unwrap();
        assert_eq!(out.step, 1.0);
        assert!(g.image(0).0.iter().all(|x| x.abs() < 1e-15));
        for v in 1..=n {
            assert_eq!(g.image(v), f.image(v));
        }
        let (h, report) = flow_to_harmonic(&k, &f, &l, &cfg).unwrap();
        assert!(report.converged() && report.is_monotone());
        assert!(h.image(0).0.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn constant_map_is_fixed() {
        let k = star(5);
        let f = SimplicialMap::constant(&k, euclid(), Point(vec![1.0, 2.0])).unwrap();
        let l = SimplicialMetric::uniform(k.num_edges(), 1.0).unwrap();
        let (g, report) = flow_to_harmonic(&k, &f, &l, &FlowConfig::default()).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(g.images(), f.images());
    }

    #[test]
    fn zero_length_spoke_moves_as_a_cluster() {
        let n = 5;
        let k = star(n);
        let mut images = ring_images(n, [0.2, 0.3]);
        images[1] = Point(vec![0.2, 0.3]);
        let f = SimplicialMap::with_identity_decks(&k, euclid(), images).unwrap();
        let l = crate::metric::induced_quasimetric(&k, &f).unwrap();
        assert_eq!(l.get(0), 0.0);
        let cfg = FlowConfig {
            fixed_vertices: (2..=n).collect(),
            ..FlowConfig::default()
        };
        let (g, report) = flow_to_harmonic(&k, &f, &l, &cfg).unwrap();
        assert!(report.converged(), "{:?}", report.termination);
        assert_eq!(g.image(0), g.image(1));
        assert!(report.final_energy < f.energy(&k, &l).unwrap().value());
    }

    #[test]
    fn trees_are_rejected() {
        let t = make_target(&TargetSpec::MetricTree {
            num_vertices: 2,
            edges: vec![[0, 1]],
            lengths: vec![1.0],
        })
        .unwrap();
        let k = star(3);
        let f = SimplicialMap::constant(&k, t, Point(vec![-1.0, 0.0])).unwrap();
        let l = SimplicialMetric::uniform(k.num_edges(), 1.0).unwrap();
        assert_eq!(energy_gradient(&k, &f, &l), Err(SolverError::TreeTarget));
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = FlowConfig {
            shrink: 1.0,
            ..FlowConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

//! Hyperboloid model of hyperbolic n-space.
//!
//! Points live on the upper sheet `<x,x> = -1, x0 > 0` of Minkowski space
//! `R^{n,1}` with `<x,y> = -x0 y0 + x1 y1 + ... + xn yn`. Tangent vectors at
//! `p` are ambient vectors with `<p,v> = 0`.

use super::{
    DeckElement, DeckSpec, GeodesicTarget, Point, TangentVector, TargetError,
    TargetKind, TargetSpec,
};

pub(crate) fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = -a[0] * b[0];
    for i in 1..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Puts `x` back on the upper sheet by recomputing the time coordinate.
pub(crate) fn reproject(x: &mut [f64]) {
    let spatial: f64 = x[1..].iter().map(|c| c * c).sum();
    x[0] = (1.0 + spatial).sqrt();
}

pub(crate) fn origin(dim: usize) -> Vec<f64> {
    let mut o = vec![0.0; dim + 1];
    o[0] = 1.0;
    o
}

/// Lifts spatial coordinates onto the hyperboloid.
pub fn lift(spatial: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(spatial.len() + 1);
    x.push(0.0);
    x.extend_from_slice(spatial);
    reproject(&mut x);
    x
}

/// `d/sinh(d)` without cancellation near zero.
fn d_over_sinh(d: f64) -> f64 {
    if d < 1e-4 {
        1.0 - d * d / 6.0
    } else {
        d / d.sinh()
    }
}

/// `sinh(n)/n` without cancellation near zero.
fn sinhc(n: f64) -> f64 {
    if n < 1e-4 {
        1.0 + n * n / 6.0
    } else {
        n.sinh() / n
    }
}

/// Minkowski chord norm `sqrt(<p-q,p-q>) = 2 sinh(d/2)`.
fn chord(p: &[f64], q: &[f64]) -> f64 {
    let mut s = -(p[0] - q[0]) * (p[0] - q[0]);
    for i in 1..p.len() {
        let d = p[i] - q[i];
        s += d * d;
    }
    s.max(0.0).sqrt()
}

pub(crate) fn distance(p: &[f64], q: &[f64]) -> f64 {
    2.0 * (0.5 * chord(p, q)).asinh()
}

pub(crate) fn log(p: &[f64], q: &[f64]) -> Vec<f64> {
    let c = chord(p, q);
    let d = 2.0 * (0.5 * c).asinh();
    // q + <p,q> p == (q - p) - (c^2 / 2) p, which stays accurate for nearby points.
    let half_c2 = 0.5 * c * c;
    let k = d_over_sinh(d);
    let mut u: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(pi, qi)| k * ((qi - pi) - half_c2 * pi))
        .collect();
    project_tangent(p, &mut u);
    u
}

pub(crate) fn tangent_norm(v: &[f64]) -> f64 {
    minkowski_dot(v, v).max(0.0).sqrt()
}

pub(crate) fn exp(p: &[f64], v: &[f64]) -> Vec<f64> {
    let n = tangent_norm(v);
    let ch = n.cosh();
    let sc = sinhc(n);
    let mut x: Vec<f64> = p.iter().zip(v).map(|(pi, vi)| ch * pi + sc * vi).collect();
    reproject(&mut x);
    x
}

/// Parallel transport along the geodesic from `p` to `q`:
/// `v + <q, v> / (1 - <p, q>) · (p + q)`.
pub(crate) fn transport(p: &[f64], q: &[f64], v: &[f64]) -> Vec<f64> {
    let c = minkowski_dot(q, v) / (1.0 - minkowski_dot(p, q));
    v.iter().zip(p.iter().zip(q)).map(|(vi, (pi, qi))| vi + c * (pi + qi)).collect()
}

pub(crate) fn project_tangent(p: &[f64], v: &mut [f64]) {
    let k = minkowski_dot(p, v);
    for (vi, pi) in v.iter_mut().zip(p) {
        *vi += k * pi;
    }
}

/// Minkowski-orthonormal basis of the tangent space at `p`.
pub(crate) fn tangent_frame(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for axis in 1..n {
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        project_tangent(p, &mut v);
        for b in &frame {
            let k = minkowski_dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= k * bi;
            }
        }
        let norm = tangent_norm(&v);
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        frame.push(v);
    }
    frame
}

/// Poincaré ball coordinates `x_i / (1 + x_0)`.
pub fn to_poincare(x: &[f64]) -> Vec<f64> {
    x[1..].iter().map(|c| c / (1.0 + x[0])).collect()
}

pub fn from_poincare(y: &[f64]) -> Vec<f64> {
    let r2: f64 = y.iter().map(|c| c * c).sum();
    let denom = 1.0 - r2;
    let mut x = Vec::with_capacity(y.len() + 1);
    x.push((1.0 + r2) / denom);
    x.extend(y.iter().map(|c| 2.0 * c / denom));
    x
}

/// Hyperbolic space `H^n` for `1 <= n <= 3`.
#[derive(Debug, Clone)]
pub struct Hyperbolic {
    dim: usize,
}

impl Hyperbolic {
    pub fn new(dim: usize) -> Result<Self, TargetError> {
        if !(1..=3).contains(&dim) {
            return Err(TargetError::Malformed(format!(
                "hyperbolic dimension must be 1..=3, got {dim}"
            )));
        }
        Ok(Self { dim })
    }
}

impl GeodesicTarget for Hyperbolic {
    fn kind(&self) -> TargetKind {
        TargetKind::Hyperbolic
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    fn normalize_point(&self, p: &Point) -> Result<Point, TargetError> {
        check_hyperboloid_point(p, self.dim)
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        distance(&p.0, &q.0)
    }

    fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Point {
        geodesic_eval(p, q, t)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<TangentVector, TargetError> {
        Ok(log(&p.0, &q.0))
    }

    fn exp(&self, p: &Point, v: &[f64]) -> Result<Point, TargetError> {
        Ok(Point(exp(&p.0, v)))
    }

    fn tangent_norm(&self, _p: &Point, v: &[f64]) -> f64 {
        tangent_norm(v)
    }

    fn tangent_dot(&self, _p: &Point, u: &[f64], v: &[f64]) -> f64 {
        minkowski_dot(u, v)
    }

    fn parallel_transport(&self, p: &Point, q: &Point, v: &[f64]) -> Result<TangentVector, TargetError> {
        Ok(transport(&p.0, &q.0, v))
    }

    fn tangent_frame(&self, p: &Point) -> Result<Vec<TangentVector>, TargetError> {
        Ok(tangent_frame(&p.0))
    }

    fn deck_apply(&self, g: &DeckElement, p: &Point) -> Result<Point, TargetError> {
        g.require_identity()?;
        Ok(p.clone())
    }

    fn deck_apply_vector(&self, g: &DeckElement, v: &[f64]) -> Result<TangentVector, TargetError> {
        g.require_identity()?;
        Ok(v.to_vec())
    }

    fn deck_compose(&self, g: &DeckElement, h: &DeckElement) -> Result<DeckElement, TargetError> {
        g.require_identity()?;
        h.require_identity()?;
        Ok(DeckElement::Identity)
    }

    fn deck_inverse(&self, g: &DeckElement) -> Result<DeckElement, TargetError> {
        g.require_identity()?;
        Ok(DeckElement::Identity)
    }

    fn decks_equal(&self, g: &DeckElement, h: &DeckElement, _tol: f64) -> bool {
        g.is_identity() && h.is_identity()
    }

    fn parse_deck(&self, spec: &DeckSpec) -> Result<DeckElement, TargetError> {
        spec.parse_identity_only()
    }

    fn encode_deck(&self, _g: &DeckElement) -> DeckSpec {
        DeckSpec::identity()
    }

    fn curvature_upper_bound(&self) -> f64 {
        -1.0
    }

    fn model_curvature(&self) -> Option<f64> {
        Some(-1.0)
    }

    fn spec(&self) -> TargetSpec {
        TargetSpec::Hyperbolic { dim: self.dim }
    }
}

pub(crate) fn geodesic_eval(p: &Point, q: &Point, t: f64) -> Point {
    if t == 0.0 {
        return p.clone();
    }
    if t == 1.0 {
        return q.clone();
    }
    let v: Vec<f64> = log(&p.0, &q.0).into_iter().map(|c| c * t).collect();
    Point(exp(&p.0, &v))
}

pub(crate) fn check_hyperboloid_point(p: &Point, dim: usize) -> Result<Point, TargetError> {
    if p.0.len() != dim + 1 {
        return Err(TargetError::DimensionMismatch {
            expected: dim + 1,
            got: p.0.len(),
        });
    }
    if p.0.iter().any(|c| !c.is_finite()) || p.0[0] <= 0.0 {
        return Err(TargetError::Malformed(format!(
            "point {:?} is not on the upper hyperboloid sheet",
            p.0
        )));
    }
    let q = minkowski_dot(&p.0, &p.0);
    if (q + 1.0).abs() > 1e-6 * p.0[0] * p.0[0] {
        return Err(TargetError::Malformed(format!(
            "point {:?} violates <x,x> = -1 (got {q})",
            p.0
        )));
    }
    let mut x = p.0.clone();
    reproject(&mut x);
    Ok(Point(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_is_an_isometry_carrying_the_geodesic_velocity() {
        let p = lift(&[0.2, -0.4]);
        let q = lift(&[-0.7, 0.5]);
        let u = log(&p, &q);
        // the velocity at q of the geodesic from p is -log_q(p)
        let moved = transport(&p, &q, &u);
        let back: Vec<f64> = log(&q, &p).iter().map(|x| -x).collect();
        for (a, b) in moved.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let v = {
            let mut v = vec![0.3, 1.0, -2.0];
            project_tangent(&p, &mut v);
            v
        };
        let tv = transport(&p, &q, &v);
        assert!(minkowski_dot(&tv, &q).abs() < 1e-12);
        assert!((tangent_norm(&tv) - tangent_norm(&v)).abs() < 1e-12);
        assert!((minkowski_dot(&tv, &moved) - minkowski_dot(&v, &u)).abs() < 1e-12);
    }

    #[test]
    fn log_exp_round_trip_close_points() {
        let p = lift(&[0.3, -0.2]);
        let q = lift(&[0.3 + 1e-7, -0.2]);
        let v = log(&p, &q);
        let back = exp(&p, &v);
        for (a, b) in back.iter().zip(&q) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((tangent_norm(&v) - distance(&p, &q)).abs() < 1e-20);
    }

    #[test]
    fn frame_is_orthonormal_and_tangent() {
        let p = lift(&[1.5, -0.7, 0.2]);
        let frame = tangent_frame(&p);
        assert_eq!(frame.len(), 3);
        for (i, a) in frame.iter().enumerate() {
            assert!(minkowski_dot(&p, a).abs() < 1e-12);
            for (j, b) in frame.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((minkowski_dot(a, b) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poincare_origin() {
        assert_eq!(to_poincare(&[1.0, 0.0, 0.0]), vec![0.0, 0.0]);
        let y = [0.3, -0.4];
        let back = to_poincare(&from_poincare(&y));
        assert!((back[0] - 0.3).abs() < 1e-15 && (back[1] + 0.4).abs() < 1e-15);
    }
}

use std::f64::consts::PI;

use serde::Serialize;

use super::SimplicialMap;
use crate::complex::DeltaComplex;
use crate::metric::heron;
use crate::targets::TargetError;

/// Interior angles of a geodesic triangle in the model space of constant
/// curvature `kappa` (0 or -1), opposite the sides `a`, `b`, `c`.
///
/// Uses the half-angle formulas, which stay accurate for thin triangles.
/// Returns `None` if a side is zero.
pub fn triangle_angles(a: f64, b: f64, c: f64, kappa: f64) -> Option<[f64; 3]> {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return None;
    }
    let f = |x: f64| if kappa < 0.0 { x.sinh() } else { x };
    let s = 0.5 * (a + b + c);
    let (sa, sb, sc) = ((s - a).max(0.0), (s - b).max(0.0), (s - c).max(0.0));
    let half = |x: f64, y: f64, opp: f64| 2.0 * (f(x) * f(y)).sqrt().atan2((f(s) * f(opp)).sqrt());
    Some([half(sb, sc, sa), half(sa, sc, sb), half(sa, sb, sc)])
}

/// Area of a geodesic triangle with the given side lengths; zero when any
/// side vanishes.
pub fn triangle_area(a: f64, b: f64, c: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        return heron(a, b, c);
    }
    match triangle_angles(a, b, c, kappa) {
        None => 0.0,
        Some([x, y, z]) => ((PI - x - y - z) / -kappa).max(0.0),
    }
}

/// Corner angles of one face; `None` marks a corner with a zero-length
/// incident image segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerAngles {
    pub face: usize,
    /// Indexed like the face's vertex sequence.
    pub angles: Vec<Option<f64>>,
}

/// Fan triangles of face `f` from its preferred corner, as triples of
/// positions in the cycle, together with the face lift starting there.
fn fan(
    map: &SimplicialMap,
    k: &DeltaComplex,
    f: usize,
) -> Result<(usize, Vec<crate::targets::Point>), TargetError> {
    let start = k.preferred_corner(f);
    Ok((start, map.face_lift(k, f, start)?))
}

/// Angles at every corner of face `f`, polygons split into a fan from the
/// preferred vertex.
pub fn face_corner_angles(
    map: &SimplicialMap,
    k: &DeltaComplex,
    f: usize,
) -> Result<CornerAngles, TargetError> {
    let kappa = map
        .target()
        .model_curvature()
        .ok_or(TargetError::Unsupported("angles"))?;
    let t = map.target();
    let (start, lift) = fan(map, k, f)?;
    let n = lift.len();
    let mut angles: Vec<Option<f64>> = vec![Some(0.0); n];
    for j in 1..n - 1 {
        let (p, q, r) = (&lift[0], &lift[j], &lift[j + 1]);
        let (a, b, c) = (t.distance(q, r), t.distance(r, p), t.distance(p, q));
        let tri = triangle_angles(a, b, c, kappa);
        for (slot, local) in [(0, 0), (j, 1), (j + 1, 2)] {
            let entry = &mut angles[slot];
            *entry = match (*entry, tri) {
                (Some(acc), Some(ang)) => Some(acc + ang[local]),
                _ => None,
            };
        }
    }
    // rotate back so index i is the face's i-th vertex
    let mut ordered = vec![None; n];
    for (i, a) in angles.into_iter().enumerate() {
        ordered[(start + i) % n] = a;
    }
    Ok(CornerAngles {
        face: f,
        angles: ordered,
    })
}

/// Area of the image: each face is coned from its preferred vertex into
/// geodesic triangles. Metric trees give zero.
pub fn riemannian_area(map: &SimplicialMap, k: &DeltaComplex) -> Result<f64, TargetError> {
    let Some(kappa) = map.target().model_curvature() else {
        return Ok(0.0);
    };
    let t = map.target();
    let mut total = 0.0;
    for f in 0..k.num_faces() {
        let (_, lift) = fan(map, k, f)?;
        for j in 1..lift.len() - 1 {
            let (p, q, r) = (&lift[0], &lift[j], &lift[j + 1]);
            total += triangle_area(t.distance(q, r), t.distance(r, p), t.distance(p, q), kappa);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_angles_sum_to_pi() {
        let [a, b, c] = triangle_angles(3.0, 4.0, 5.0, 0.0).unwrap();
        assert!((c - PI / 2.0).abs() < 1e-15);
        assert!((a + b + c - PI).abs() < 1e-15);
        assert_eq!(triangle_area(3.0, 4.0, 5.0, 0.0), 6.0);
        assert!(triangle_angles(0.0, 1.0, 1.0, 0.0).is_none());
    }

    #[test]
    fn hyperbolic_angles_match_law_of_cosines() {
        let (a, b, c): (f64, f64, f64) = (1.1, 0.7, 1.4);
        let [alpha, _, _] = triangle_angles(a, b, c, -1.0).unwrap();
        let cos = (b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh());
        assert!((alpha - cos.acos()).abs() < 1e-12);
    }

    #[test]
    fn long_hyperbolic_triangles_approach_pi() {
        let mut last = 0.0;
        for d in [2.0, 5.0, 10.0, 20.0] {
            let area = triangle_area(d, d, d, -1.0);
            assert!(area < PI && area > last);
            last = area;
        }
        // the angles of an equilateral triangle of side d decay like e^{-d/2}
        assert!(PI - last < 1e-3);
    }

    #[test]
    fn degenerate_triangles_have_zero_area() {
        assert_eq!(triangle_area(1.0, 1.0, 2.0, 0.0), 0.0);
        assert!(triangle_area(1.0, 1.0, 2.0, -1.0).abs() < 1e-15);
        assert_eq!(triangle_area(0.0, 1.0, 1.0, -1.0), 0.0);
    }
}

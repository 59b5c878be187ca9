//! Conformal subdivision of triangles and quadrilaterals.
//!
//! Numbering of the output, with `V`, `E`, `F` the input counts:
//! the midpoint of edge `e` is vertex `V + e`; edge `2e` runs from the tail
//! of `e` to its midpoint and `2e + 1` from the midpoint to the head.
//! Triangle face `f` yields corner triangles `4f + i` at its `i`-th vertex
//! and the middle triangle `4f + 3`, joined by edges `2E + 3f + k` from
//! midpoint `k` to midpoint `k + 1`. Quad face `f` gains a centre vertex
//! `V + E + f`, edges `2E + 4f + k` from midpoint `k` to the centre, and
//! corner quads `4f + i`.

use super::{ComplexError, DeltaComplex, Side};
use crate::metric::{MetricError, SimplicialMetric};
use crate::smap::{MapError, SimplicialMap};
use crate::targets::DeckElement;

fn first_half(s: Side) -> Side {
    if s.forward {
        Side::fwd(2 * s.edge)
    } else {
        Side::bwd(2 * s.edge + 1)
    }
}

fn second_half(s: Side) -> Side {
    if s.forward {
        Side::fwd(2 * s.edge + 1)
    } else {
        Side::bwd(2 * s.edge)
    }
}

fn half_edges(k: &DeltaComplex) -> Vec<[usize; 2]> {
    let v = k.num_vertices();
    let mut edges = Vec::with_capacity(2 * k.num_edges());
    for (e, &[t, h]) in k.edges().iter().enumerate() {
        edges.push([t, v + e]);
        edges.push([v + e, h]);
    }
    edges
}

fn triangle_structure(k: &DeltaComplex) -> Result<DeltaComplex, ComplexError> {
    k.require_arity(3)?;
    let (nv, ne) = (k.num_vertices(), k.num_edges());
    let mut edges = half_edges(k);
    let mut faces = Vec::with_capacity(4 * k.num_faces());
    for (f, face) in k.faces().iter().enumerate() {
        let mid = |i: usize| nv + face[i % 3].edge;
        for kk in 0..3 {
            edges.push([mid(kk), mid(kk + 1)]);
        }
        let inner = |kk: usize| 2 * ne + 3 * f + kk % 3;
        for i in 0..3 {
            let prev = (i + 2) % 3;
            faces.push(vec![second_half(face[prev]), first_half(face[i]), Side::bwd(inner(prev))]);
        }
        faces.push(vec![Side::fwd(inner(0)), Side::fwd(inner(1)), Side::fwd(inner(2))]);
    }
    DeltaComplex::build(nv + ne, edges, faces, k.mode())
}

fn halved_lengths(l: &SimplicialMetric) -> Vec<f64> {
    l.lengths().iter().flat_map(|&x| [0.5 * x, 0.5 * x]).collect()
}

/// Splits every triangle into four by joining edge midpoints. Half edges
/// get half the parent length and each midpoint segment half the length of
/// the side it is parallel to.
pub fn conformal_subdivide_triangle(
    k: &DeltaComplex,
    l: &SimplicialMetric,
) -> Result<(DeltaComplex, SimplicialMetric), MetricError> {
    l.check_count(k)?;
    let sub = triangle_structure(k)?;
    let mut lengths = halved_lengths(l);
    for face in k.faces() {
        for kk in 0..3 {
            lengths.push(0.5 * l.get(face[(kk + 2) % 3].edge));
        }
    }
    Ok((sub, SimplicialMetric::new(lengths)?))
}

/// Splits every quadrilateral `(a, b, c, d)` into four by the two cuts
/// joining midpoints of opposite sides. Each half of the cut meeting `a`
/// and `c` gets `(b + d) / 4`, each half of the other cut `(a + c) / 4`.
pub fn conformal_subdivide_quad(
    k: &DeltaComplex,
    l: &SimplicialMetric,
) -> Result<(DeltaComplex, SimplicialMetric), MetricError> {
    l.check_count(k)?;
    k.require_arity(4)?;
    let (nv, ne) = (k.num_vertices(), k.num_edges());
    let mut edges = half_edges(k);
    let mut lengths = halved_lengths(l);
    let mut faces = Vec::with_capacity(4 * k.num_faces());
    for (f, face) in k.faces().iter().enumerate() {
        let centre = nv + ne + f;
        let side_len = |i: usize| l.get(face[i % 4].edge);
        for kk in 0..4 {
            edges.push([nv + face[kk].edge, centre]);
            lengths.push(0.25 * (side_len(kk + 1) + side_len(kk + 3)));
        }
        let inner = |kk: usize| 2 * ne + 4 * f + kk % 4;
        for i in 0..4 {
            let prev = (i + 3) % 4;
            faces.push(vec![
                second_half(face[prev]),
                first_half(face[i]),
                Side::fwd(inner(i)),
                Side::bwd(inner(prev)),
            ]);
        }
    }
    let sub = DeltaComplex::build(nv + ne + k.num_faces(), edges, faces, k.mode())?;
    Ok((sub, SimplicialMetric::new(lengths)?))
}

/// Conformal subdivision of a triangulated map: each midpoint goes to the
/// midpoint of its edge's image geodesic, and decks of the new edges are
/// read off the face lifts so the homotopy class is unchanged.
pub fn subdivide_map_triangle(
    k: &DeltaComplex,
    f: &SimplicialMap,
) -> Result<(DeltaComplex, SimplicialMap), MapError> {
    let sub = triangle_structure(k)?;
    let t = f.target();
    let mut images: Vec<_> = f.images().to_vec();
    for e in 0..k.num_edges() {
        let [tail, _] = k.edge(e);
        images.push(t.geodesic_eval(f.image(tail), &f.head_lift(k, e), 0.5));
    }
    let mut decks = Vec::with_capacity(sub.num_edges());
    for g in f.decks() {
        decks.push(DeckElement::Identity);
        decks.push(g.clone());
    }
    for fi in 0..k.num_faces() {
        let face = k.face(fi);
        let frames = f.face_frames(k, fi, 0)?;
        // frame of the tail of side kk's edge
        let tail_frame = |kk: usize| {
            let kk = kk % 3;
            if face[kk].forward {
                frames[kk].clone()
            } else {
                frames[(kk + 1) % 3].clone()
            }
        };
        for kk in 0..3 {
            let a = t.deck_inverse(&tail_frame(kk))?;
            decks.push(t.deck_compose(&a, &tail_frame(kk + 1))?);
        }
    }
    let map = SimplicialMap::new(&sub, t.clone(), images, decks)?;
    Ok((sub, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{simplicial_area, validate_metric};
    use crate::targets::{make_target, Point, TargetSpec};

    fn triangle() -> DeltaComplex {
        DeltaComplex::from_lists(&[[0, 1], [1, 2], [0, 2]], &[vec![(0, 1), (1, 1), (2, -1)]]).unwrap()
    }

    fn quad() -> DeltaComplex {
        DeltaComplex::from_lists(
            &[[0, 1], [1, 2], [3, 2], [0, 3]],
            &[vec![(0, 1), (1, 1), (2, -1), (3, -1)]],
        )
        .unwrap()
    }

    fn m(v: &[f64]) -> SimplicialMetric {
        SimplicialMetric::new(v.to_vec()).unwrap()
    }

    #[test]
    fn equilateral_splits_into_quarter_triangles() {
        let k = triangle();
        let (s, l) = conformal_subdivide_triangle(&k, &m(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!((s.num_vertices(), s.num_edges(), s.num_faces()), (6, 9, 4));
        assert!(l.lengths().iter().all(|&x| x == 0.5));
        assert_eq!(simplicial_area(&s, &l), 3.0);
        assert_eq!(s.euler_characteristic(), k.euler_characteristic());
    }

    #[test]
    fn triangle_area_preserved() {
        let k = triangle();
        for lens in [[3.0, 4.0, 5.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0]] {
            let l = m(&lens);
            let (s, ls) = conformal_subdivide_triangle(&k, &l).unwrap();
            assert_eq!(simplicial_area(&s, &ls), simplicial_area(&k, &l));
            assert!(validate_metric(&s, &ls).unwrap().is_valid());
        }
    }

    #[test]
    fn quad_area_preserved() {
        let k = quad();
        for lens in [[1.0, 1.0, 1.0, 1.0], [2.0, 1.0, 2.0, 1.0], [0.0, 1.0, 0.0, 2.0], [1.0, 2.0, 3.0, 4.0]] {
            let l = m(&lens);
            let (a, b, c, d) = (lens[0], lens[1], lens[2], lens[3]);
            assert_eq!(simplicial_area(&k, &l), (a + c) * (b + d));
            let (s, ls) = conformal_subdivide_quad(&k, &l).unwrap();
            assert_eq!(s.num_faces(), 4);
            assert!((simplicial_area(&s, &ls) - simplicial_area(&k, &l)).abs() < 1e-12);
            if lens[0] > 0.0 {
                assert!(validate_metric(&s, &ls).unwrap().is_valid());
            }
        }
        // a quad with two opposite sides collapsed subdivides into children
        // that are not metric: one cut half is longer than the rest of its quad
        let (s, ls) = conformal_subdivide_quad(&k, &m(&[0.0, 1.0, 0.0, 2.0])).unwrap();
        assert!(!validate_metric(&s, &ls).unwrap().is_valid());
        let (s, ls) = conformal_subdivide_quad(&k, &m(&[1.0; 4])).unwrap();
        assert!(ls.lengths().iter().all(|&x| x == 0.5));
        assert_eq!(simplicial_area(&s, &ls), 4.0);
    }

    #[test]
    fn torus_map_subdivision_keeps_lengths_halved() {
        let k = DeltaComplex::from_lists(
            &[[0, 0], [0, 0], [0, 0]],
            &[vec![(0, 1), (1, 1), (2, -1)], vec![(1, 1), (0, 1), (2, -1)]],
        )
        .unwrap();
        let t = make_target(&TargetSpec::FlatTorus { dim: 2 }).unwrap();
        let f = SimplicialMap::new(
            &k,
            t,
            vec![Point(vec![0.1, 0.2])],
            vec![
                DeckElement::Translation(vec![1, 0]),
                DeckElement::Translation(vec![0, 1]),
                DeckElement::Translation(vec![1, 1]),
            ],
        )
        .unwrap();
        let (s, g) = subdivide_map_triangle(&k, &f).unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        let big = f.edge_lengths(&k);
        let l = SimplicialMetric::new(big).unwrap();
        let (_, ls) = conformal_subdivide_triangle(&k, &l).unwrap();
        for (a, b) in g.edge_lengths(&s).iter().zip(ls.lengths()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

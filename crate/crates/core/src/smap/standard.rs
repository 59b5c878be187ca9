use std::collections::HashMap;

use super::{MapError, SimplicialMap};
use crate::complex::{annulus_quad_complex, DeltaComplex};
use crate::targets::{Point, SharedTarget, TargetSpec};

/// An annulus of a quad complex, given by its rungs, projected across one
/// edge of the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedAnnulus {
    pub rungs: Vec<usize>,
    pub tree_edge: usize,
}

fn tree_vertex_point(v: usize) -> Point {
    Point(vec![-(v as f64) - 1.0, 0.0])
}

/// Map into a metric tree that is constant on every region and sends each
/// marked annulus across its tree edge.
///
/// `vertex_regions[v]` is the tree vertex receiving domain vertex `v`.
/// Every non-rung edge must join vertices of the same region, every rung
/// must join the two endpoints of its annulus's tree edge, and each quad
/// touching a rung must have rungs of that annulus on two opposite sides.
pub fn standard_type_map(
    k: &DeltaComplex,
    target: SharedTarget,
    vertex_regions: &[usize],
    annuli: &[MarkedAnnulus],
) -> Result<SimplicialMap, MapError> {
    let TargetSpec::MetricTree {
        num_vertices,
        edges: tree_edges,
        ..
    } = target.spec()
    else {
        return Err(MapError::Incidence("standard-type maps need a metric tree target".into()));
    };
    k.require_arity(4).map_err(|e| MapError::Incidence(e.to_string()))?;
    if vertex_regions.len() != k.num_vertices() {
        return Err(MapError::ImageCount {
            expected: k.num_vertices(),
            got: vertex_regions.len(),
        });
    }
    if let Some(v) = vertex_regions.iter().position(|&r| r >= num_vertices) {
        return Err(MapError::Incidence(format!(
            "vertex {v} assigned to missing tree vertex {}",
            vertex_regions[v]
        )));
    }
    let mut rung_owner: HashMap<usize, usize> = HashMap::new();
    for (a, ann) in annuli.iter().enumerate() {
        let Some(&[x, y]) = tree_edges.get(ann.tree_edge) else {
            return Err(MapError::Incidence(format!(
                "annulus {a} assigned to missing tree edge {}",
                ann.tree_edge
            )));
        };
        for &r in &ann.rungs {
            if r >= k.num_edges() {
                return Err(MapError::Incidence(format!("annulus {a} lists missing edge {r}")));
            }
            if rung_owner.insert(r, a).is_some() {
                return Err(MapError::Incidence(format!("edge {r} is a rung of two annuli")));
            }
            let [t, h] = k.edge(r);
            let ends = [vertex_regions[t], vertex_regions[h]];
            if ends != [x, y] && ends != [y, x] {
                return Err(MapError::Incidence(format!(
                    "rung {r} joins regions {ends:?}, annulus {a} is assigned to tree edge {} = {:?}",
                    ann.tree_edge,
                    [x, y]
                )));
            }
        }
    }
    for e in 0..k.num_edges() {
        if rung_owner.contains_key(&e) {
            continue;
        }
        let [t, h] = k.edge(e);
        if vertex_regions[t] != vertex_regions[h] {
            return Err(MapError::Incidence(format!(
                "edge {e} joins regions {} and {} but is not a rung",
                vertex_regions[t], vertex_regions[h]
            )));
        }
    }
    for f in 0..k.num_faces() {
        let face = k.face(f);
        let owners: Vec<Option<usize>> = face.iter().map(|s| rung_owner.get(&s.edge).copied()).collect();
        if owners.iter().all(Option::is_none) {
            continue;
        }
        let standard = (0..2).any(|i| {
            owners[i].is_some()
                && owners[i] == owners[i + 2]
                && owners[i + 1].is_none()
                && owners[(i + 3) % 4].is_none()
        });
        if !standard {
            return Err(MapError::Incidence(format!(
                "face {f} is not a standard annulus quad (rung owners {owners:?})"
            )));
        }
    }
    let images = vertex_regions.iter().map(|&r| tree_vertex_point(r)).collect();
    SimplicialMap::with_identity_decks(k, target, images)
}

/// Standard subdivision of an annulus with `n` quads, bottom circle sent to
/// the tail of `tree_edge` and top circle to its head.
pub fn standard_annulus_map(
    n: usize,
    target: SharedTarget,
    tree_edge: usize,
) -> Result<(DeltaComplex, SimplicialMap), MapError> {
    let k = annulus_quad_complex(n).map_err(|e| MapError::Incidence(e.to_string()))?;
    let TargetSpec::MetricTree { edges, .. } = target.spec() else {
        return Err(MapError::Incidence("standard-type maps need a metric tree target".into()));
    };
    let [x, y] = *edges.get(tree_edge).ok_or_else(|| {
        MapError::Incidence(format!("missing tree edge {tree_edge}"))
    })?;
    let regions: Vec<usize> = (0..2 * n).map(|v| if v < n { x } else { y }).collect();
    let annulus = MarkedAnnulus {
        rungs: (2 * n..3 * n).collect(),
        tree_edge,
    };
    let f = standard_type_map(&k, target, &regions, &[annulus])?;
    Ok((k, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::induced_quasimetric;
    use crate::smap::Energy;
    use crate::targets::make_target;

    fn tree() -> SharedTarget {
        make_target(&TargetSpec::MetricTree {
            num_vertices: 3,
            edges: vec![[0, 1], [1, 2]],
            lengths: vec![1.0, 2.0],
        })
        .unwrap()
    }

    #[test]
    fn annulus_over_unit_edge_has_zero_energy() {
        let (k, f) = standard_annulus_map(4, tree(), 0).unwrap();
        let l = induced_quasimetric(&k, &f).unwrap();
        for e in 0..8 {
            assert_eq!(l.get(e), 0.0);
        }
        for e in 8..12 {
            assert_eq!(l.get(e), 1.0);
        }
        assert_eq!(f.energy(&k, &l).unwrap(), Energy::Finite(0.0));
    }

    #[test]
    fn constant_regions_without_annuli() {
        let k = annulus_quad_complex(3).unwrap();
        let f = standard_type_map(&k, tree(), &[2; 6], &[]).unwrap();
        let l = induced_quasimetric(&k, &f).unwrap();
        assert_eq!(f.energy(&k, &l).unwrap(), Energy::Finite(0.0));
    }

    #[test]
    fn non_incident_edge_is_rejected() {
        let k = annulus_quad_complex(3).unwrap();
        let regions = [0, 0, 0, 1, 1, 1];
        let bad = MarkedAnnulus {
            rungs: vec![6, 7, 8],
            tree_edge: 1,
        };
        assert!(matches!(
            standard_type_map(&k, tree(), &regions, &[bad]),
            Err(MapError::Incidence(_))
        ));
    }
}

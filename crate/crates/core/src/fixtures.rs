//! Reference instances: the one-vertex torus, the genus-2 octagon fan and
//! its subdivisions, a Dirichlet grid disk, and an annulus over a tree.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex::{conformal_subdivide_triangle, subdivide_map_triangle, DeltaComplex, Side};
use crate::metric::{induced_quasimetric, SimplicialMetric};
use crate::smap::{standard_annulus_map, MapFile, SimplicialMap};
use crate::targets::{
    make_target, DeckElement, DeckWord, Genus2Octagon, Point, SharedTarget, TargetSpec,
};

/// A complex with a metric, a map, and optional Dirichlet vertices.
#[derive(Clone, Debug)]
pub struct Instance {
    pub complex: DeltaComplex,
    pub metric: SimplicialMetric,
    pub map: SimplicialMap,
    pub fixed: Vec<usize>,
}

/// Serialized form of an [`Instance`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub complex: DeltaComplex,
    pub metric: SimplicialMetric,
    pub target: TargetSpec,
    pub map: MapFile,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed: Vec<usize>,
}

impl Instance {
    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            complex: self.complex.clone(),
            metric: self.metric.clone(),
            target: self.map.target().spec(),
            map: self.map.to_file(),
            fixed: self.fixed.clone(),
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self, crate::smap::MapError> {
        let target = make_target(&file.target)?;
        let map = SimplicialMap::from_file(&file.complex, target, &file.map)?;
        Ok(Self {
            complex: file.complex.clone(),
            metric: file.metric.clone(),
            map,
            fixed: file.fixed.clone(),
        })
    }
}

/// The one-vertex torus: edges along `(1,0)`, `(0,1)` and the diagonal
/// `(1,1)`, two coherently oriented triangles.
pub fn torus_complex() -> DeltaComplex {
    DeltaComplex::from_lists(
        &[[0, 0], [0, 0], [0, 0]],
        &[vec![(0, 1), (1, 1), (2, -1)], vec![(2, 1), (0, -1), (1, -1)]],
    )
    .expect("torus complex is valid")
}

/// Identity map of the one-vertex torus onto `R^2 / Z^2`, with the induced
/// metric `(1, 1, √2)`.
pub fn torus_identity() -> Instance {
    let k = torus_complex();
    let t = make_target(&TargetSpec::FlatTorus { dim: 2 }).expect("valid target");
    let decks = vec![
        DeckElement::Translation(vec![1, 0]),
        DeckElement::Translation(vec![0, 1]),
        DeckElement::Translation(vec![1, 1]),
    ];
    let map = SimplicialMap::new(&k, t, vec![Point(vec![0.0, 0.0])], decks).expect("cocycle holds");
    let metric = induced_quasimetric(&k, &map).expect("image lengths are metric");
    Instance {
        complex: k,
        metric,
        map,
        fixed: vec![],
    }
}

/// Edge of the fan complex for boundary letter `c` (lower case `a..d`).
fn letter_edge(c: char) -> usize {
    "abcd".find(c.to_ascii_lowercase()).expect("boundary letter")
}

/// The fundamental octagon with sides `abABcdCD`, all corners identified to
/// one vertex, triangulated by the fan of diagonals from corner 0.
///
/// Edges `0..4` are the generators `a, b, c, d`; edge `4 + (j - 2)` is the
/// diagonal from corner 0 to corner `j`, `j = 2..=6`. Triangle `j - 1` has
/// corners `0, j, j + 1`.
pub fn genus2_fan_complex() -> DeltaComplex {
    let word: Vec<char> = crate::targets::BOUNDARY_WORD.chars().collect();
    let side = |k: usize| {
        let c = word[k];
        let e = letter_edge(c);
        if c.is_ascii_lowercase() {
            Side::fwd(e)
        } else {
            Side::bwd(e)
        }
    };
    let diag = |j: usize| 4 + j - 2;
    let mut faces = Vec::new();
    for j in 1..=6 {
        let first = if j == 1 { side(0) } else { Side::fwd(diag(j)) };
        let last = if j == 6 { side(7) } else { Side::bwd(diag(j + 1)) };
        faces.push(vec![first, side(j), last]);
    }
    DeltaComplex::build(1, vec![[0, 0]; 9], faces, crate::complex::Mode::Surface)
        .expect("octagon fan is a valid complex")
}

/// Identity-class map of the fan complex: the vertex goes to octagon corner
/// 0, generators carry their deck words and diagonals the boundary prefixes.
/// The metric gives every edge length 1.
pub fn genus2_fan() -> Instance {
    let k = genus2_fan_complex();
    let oct = Genus2Octagon::new().expect("octagon group");
    let mut decks = Vec::with_capacity(9);
    for c in ['a', 'b', 'c', 'd'] {
        decks.push(DeckElement::Word(DeckWord::parse(&c.to_string()).expect("letter")));
    }
    for j in 2..=6 {
        decks.push(DeckElement::Word(oct.corner_word(j)));
    }
    let target: SharedTarget = Arc::new(oct.clone());
    let map = SimplicialMap::new(&k, target, vec![oct.corner(0)], decks).expect("cocycle holds");
    Instance {
        metric: SimplicialMetric::uniform(k.num_edges(), 1.0).expect("positive"),
        complex: k,
        map,
        fixed: vec![],
    }
}

/// The fan instance conformally subdivided `levels` times; vertex counts are
/// 1, 10, 46, 190, ...
pub fn genus2_subdivided(levels: usize) -> Instance {
    let mut inst = genus2_fan();
    for _ in 0..levels {
        let (k, map) = subdivide_map_triangle(&inst.complex, &inst.map).expect("triangulated");
        let (_, metric) = conformal_subdivide_triangle(&inst.complex, &inst.metric).expect("metric");
        inst = Instance {
            metric,
            map: recentre(&k, map),
            complex: k,
            fixed: vec![],
        };
    }
    inst
}

/// Gauge-moves every vertex image of a genus-2 map into the fundamental
/// octagon by greedy generator steps, keeping deck words and lifted
/// coordinates small.
fn recentre(k: &DeltaComplex, mut map: SimplicialMap) -> SimplicialMap {
    let t = map.target().clone();
    let letters: Vec<DeckElement> = "abcdABCD"
        .chars()
        .map(|c| DeckElement::Word(DeckWord::parse(&c.to_string()).expect("letter")))
        .collect();
    for v in 0..k.num_vertices() {
        loop {
            let height = map.image(v).0[0];
            let best = letters
                .iter()
                .map(|g| (t.deck_apply(g, map.image(v)).expect("genus-2 deck").0[0], g))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("eight letters");
            if best.0 >= height - 1e-12 {
                break;
            }
            map = map.gauge_transform(k, v, best.1).expect("gauge move");
        }
    }
    map
}

/// Triangulated `n × n` grid of unit squares, each cut along the diagonal
/// from its lower-left corner. Vertex `(i, j)` has id `j (n + 1) + i`.
pub fn grid_complex(n: usize) -> DeltaComplex {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut edges = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut edge = |a: usize, b: usize, edges: &mut Vec<[usize; 2]>| {
        *index.entry((a, b)).or_insert_with(|| {
            edges.push([a, b]);
            edges.len() - 1
        })
    };
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (p00, p10, p01, p11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            let bottom = edge(p00, p10, &mut edges);
            let right = edge(p10, p11, &mut edges);
            let diag = edge(p00, p11, &mut edges);
            let left = edge(p00, p01, &mut edges);
            let top = edge(p01, p11, &mut edges);
            faces.push(vec![Side::fwd(bottom), Side::fwd(right), Side::bwd(diag)]);
            faces.push(vec![Side::fwd(diag), Side::bwd(top), Side::bwd(left)]);
        }
    }
    DeltaComplex::build((n + 1) * (n + 1), edges, faces, crate::complex::Mode::Surface)
        .expect("grid is a valid disk")
}

/// Grid disk with its Euclidean metric. Boundary vertices are fixed on the
/// unit circle (by angle around the centre); interior vertices start at
/// their grid positions shifted by `scramble`.
pub fn dirichlet_disk(n: usize, scramble: f64) -> Instance {
    let k = grid_complex(n);
    let t = make_target(&TargetSpec::Euclidean { dim: 2 }).expect("valid target");
    let c = n as f64 / 2.0;
    let mut images = Vec::with_capacity(k.num_vertices());
    let mut fixed = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (i as f64 - c, j as f64 - c);
            if i == 0 || j == 0 || i == n || j == n {
                fixed.push(j * (n + 1) + i);
                let a = y.atan2(x);
                images.push(Point(vec![a.cos(), a.sin()]));
            } else {
                let s = scramble * ((i * 7 + j * 13) as f64).sin();
                images.push(Point(vec![x / c + s, y / c - s]));
            }
        }
    }
    let lengths = k
        .edges()
        .iter()
        .map(|&[a, b]| {
            let (ai, aj) = (a % (n + 1), a / (n + 1));
            let (bi, bj) = (b % (n + 1), b / (n + 1));
            let (dx, dy) = (bi as f64 - ai as f64, bj as f64 - aj as f64);
            dx.hypot(dy)
        })
        .collect();
    let map = SimplicialMap::with_identity_decks(&k, t, images).expect("valid images");
    Instance {
        complex: k,
        metric: SimplicialMetric::new(lengths).expect("positive lengths"),
        map,
        fixed,
    }
}

/// Standard-type map of an annulus with `n` quads across the first edge of
/// the path tree `0 - 1 - 2` (edge lengths 1 and 2), with the induced
/// quasi-metric.
pub fn annulus_tree(n: usize) -> Instance {
    let t = make_target(&TargetSpec::MetricTree {
        num_vertices: 3,
        edges: vec![[0, 1], [1, 2]],
        lengths: vec![1.0, 2.0],
    })
    .expect("valid tree");
    let (k, map) = standard_annulus_map(n, t, 0).expect("standard annulus");
    let metric = induced_quasimetric(&k, &map).expect("induced metric");
    Instance {
        complex: k,
        metric,
        map,
        fixed: vec![],
    }
}

/// Complex in the given mode whose faces are the listed vertex triples,
/// with one edge per vertex pair directed from the smaller id.
fn triangles_complex(n: usize, triples: &[[usize; 3]], mode: crate::complex::Mode) -> DeltaComplex {
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut side = |a: usize, b: usize| {
        let key = [a.min(b), a.max(b)];
        let e = edges.iter().position(|&x| x == key).unwrap_or_else(|| {
            edges.push(key);
            edges.len() - 1
        });
        if a < b {
            Side::fwd(e)
        } else {
            Side::bwd(e)
        }
    };
    let faces: Vec<Vec<Side>> = triples
        .iter()
        .map(|&[a, b, c]| vec![side(a, b), side(b, c), side(c, a)])
        .collect();
    DeltaComplex::build(n, edges, faces, mode).expect("valid triangle list")
}

/// 2-skeleton of two tetrahedra glued along a face: edges of the shared face
/// lie in three triangles. Unit metric, vertices mapped to a non-regular
/// configuration in 3-space.
pub fn double_tetrahedron() -> Instance {
    let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]];
    let k = triangles_complex(5, &triples, crate::complex::Mode::Skeleton);
    let t = make_target(&TargetSpec::Euclidean { dim: 3 }).expect("valid target");
    let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.5]];
    let map = SimplicialMap::with_identity_decks(&k, t, pts.iter().map(|p| Point(p.to_vec())).collect())
        .expect("valid images");
    Instance {
        metric: SimplicialMetric::uniform(k.num_edges(), 1.0).expect("positive"),
        complex: k,
        map,
        fixed: vec![],
    }
}

/// One triangle with sides `(1, 1, 3)`, which violate the triangle
/// inequality, under the constant map to the origin of the plane.
pub fn bad_triangle() -> Instance {
    let k = triangles_complex(3, &[[0, 1, 2]], crate::complex::Mode::Surface);
    let t = make_target(&TargetSpec::Euclidean { dim: 2 }).expect("valid target");
    let map = SimplicialMap::constant(&k, t, Point(vec![0.0, 0.0])).expect("valid");
    Instance {
        metric: SimplicialMetric::new(vec![1.0, 1.0, 3.0]).expect("positive"),
        complex: k,
        map,
        fixed: vec![],
    }
}

/// The unit-metric wheel of four triangles with one spoke of length 0 and
/// the hub mapped away from that spoke's rim vertex, so the energy is
/// infinite.
pub fn infinite_energy_wheel() -> Instance {
    let k = crate::random::wheel_complex(4);
    let t = make_target(&TargetSpec::Euclidean { dim: 2 }).expect("valid target");
    let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
    let map = SimplicialMap::with_identity_decks(&k, t, pts.iter().map(|p| Point(p.to_vec())).collect())
        .expect("valid images");
    let mut lengths = vec![1.0; k.num_edges()];
    lengths[0] = 0.0;
    Instance {
        metric: SimplicialMetric::new(lengths).expect("nonnegative"),
        complex: k,
        map,
        fixed: vec![],
    }
}

/// Vertices of a regular `n`-gon of circumradius 1.
pub fn regular_polygon(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;

    #[test]
    fn genus2_fan_counts() {
        let inst = genus2_fan();
        let k = &inst.complex;
        assert_eq!((k.num_vertices(), k.num_edges(), k.num_faces()), (1, 9, 6));
        assert_eq!(k.euler_characteristic(), -2);
        assert!(matches!(k.link(0).shape, crate::complex::LinkShape::Cycle(18)));
    }

    #[test]
    fn genus2_subdivision_counts() {
        for (levels, v) in [(1, 10), (2, 46), (3, 190)] {
            let inst = genus2_subdivided(levels);
            assert_eq!(inst.complex.num_vertices(), v);
            assert_eq!(inst.complex.euler_characteristic(), -2);
            assert!(validate_metric(&inst.complex, &inst.metric).unwrap().is_valid());
        }
    }

    #[test]
    fn skeleton_fixture_has_triple_edges() {
        let inst = double_tetrahedron();
        let k = &inst.complex;
        assert_eq!((k.num_vertices(), k.num_edges(), k.num_faces()), (5, 9, 7));
        assert_eq!((0..9).filter(|&e| k.edge_slots(e).len() == 3).count(), 3);
        assert!(inst.map.energy(k, &inst.metric).unwrap().value() > inst.map.volume2(k));
    }

    #[test]
    fn bad_and_infinite_fixtures() {
        let bad = bad_triangle();
        assert!(!validate_metric(&bad.complex, &bad.metric).unwrap().is_valid());
        let inf = infinite_energy_wheel();
        assert!(!inf.map.energy(&inf.complex, &inf.metric).unwrap().is_finite());
    }

    #[test]
    fn torus_lengths() {
        let inst = torus_identity();
        assert_eq!(inst.metric.lengths(), &[1.0, 1.0, 2f64.sqrt()]);
    }

    #[test]
    fn grid_disk_is_a_disk() {
        let inst = dirichlet_disk(4, 0.1);
        assert_eq!(inst.complex.euler_characteristic(), 1);
        assert_eq!(inst.fixed.len(), 16);
        assert_eq!(inst.complex.boundary_vertices().len(), 16);
    }

    #[test]
    fn instance_file_round_trip() {
        let inst = genus2_subdivided(1);
        let json = serde_json::to_string(&inst.to_file()).unwrap();
        let back: InstanceFile = serde_json::from_str(&json).unwrap();
        let again = Instance::from_file(&back).unwrap();
        assert_eq!(again.complex, inst.complex);
        assert_eq!(again.map.images(), inst.map.images());
        assert_eq!(again.map.decks(), inst.map.decks());
    }
}

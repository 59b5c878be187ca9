//! Δ-complex surfaces and polygonal decompositions.
//!
//! A face is a cyclic sequence of directed edges, so loops and parallel edges
//! are representable. The vertex sequence of a face is implied: side `i`
//! runs from vertex `i` to vertex `i + 1` of the face.

mod collapse;
mod subdivide;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use collapse::{collapse_zero_subcomplex, CollapseOutcome};
pub use subdivide::{
    conformal_subdivide_quad, conformal_subdivide_triangle, subdivide_map_triangle,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("face {face} references missing edge {edge}")]
    DanglingEdge { face: usize, edge: usize },
    #[error("edge {edge} references missing vertex {vertex}")]
    DanglingVertex { edge: usize, vertex: usize },
    #[error("face {face} has {len} sides, at least 3 are required")]
    ShortFace { face: usize, len: usize },
    #[error("face {face} is not a closed cycle: side {side} ends at vertex {end}, next side starts at {next}")]
    InconsistentCycle { face: usize, side: usize, end: usize, next: usize },
    #[error("bad direction flag {flag} in face {face}, expected +1 or -1")]
    BadDirection { face: usize, flag: i64 },
    #[error("edge {edge} lies in {count} face slots; surface mode allows 1 or 2")]
    SurfaceIncidence { edge: usize, count: usize },
    #[error("edge {edge} lies in no face")]
    IsolatedEdge { edge: usize },
    #[error("operation needs every face to have {expected} sides, face {face} has {got}")]
    WrongArity { face: usize, expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Closed or bordered surface: each edge lies in one or two face slots.
    #[default]
    Surface,
    /// 2-skeleton of a 3-complex: edges may lie in any positive number of faces.
    Skeleton,
}

/// A directed side of a face: an edge traversed forward (tail to head) or
/// backward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "(usize, i8)", try_from = "(usize, i8)")]
pub struct Side {
    pub edge: usize,
    pub forward: bool,
}

impl Side {
    pub fn fwd(edge: usize) -> Self {
        Side {
            edge,
            forward: true,
        }
    }

    pub fn bwd(edge: usize) -> Self {
        Side {
            edge,
            forward: false,
        }
    }

    pub fn reversed(self) -> Self {
        Side {
            edge: self.edge,
            forward: !self.forward,
        }
    }

    pub fn sign(self) -> i8 {
        if self.forward {
            1
        } else {
            -1
        }
    }
}

impl From<Side> for (usize, i8) {
    fn from(s: Side) -> Self {
        (s.edge, s.sign())
    }
}

impl TryFrom<(usize, i8)> for Side {
    type Error = String;

    fn try_from((edge, flag): (usize, i8)) -> Result<Self, String> {
        match flag {
            1 => Ok(Side::fwd(edge)),
            -1 => Ok(Side::bwd(edge)),
            other => Err(format!("direction flag must be +1 or -1, got {other}")),
        }
    }
}

/// Position of a corner: face id and index of the vertex in the face cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Corner {
    pub face: usize,
    pub index: usize,
}

/// Number of sides of a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceKind {
    pub arity: usize,
}

impl FaceKind {
    pub fn is_triangle(self) -> bool {
        self.arity == 3
    }

    pub fn is_quad(self) -> bool {
        self.arity == 4
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ComplexFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<Vec<Side>>,
    #[serde(default)]
    mode: Mode,
}

/// Validated Δ-complex with derived incidence tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexFile", into = "ComplexFile")]
pub struct DeltaComplex {
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    faces: Vec<Vec<Side>>,
    mode: Mode,
    /// Face slots `(face, side index)` of every edge.
    edge_slots: Vec<Vec<(usize, usize)>>,
    /// Edges incident to each vertex (a loop is listed once).
    vertex_edges: Vec<Vec<usize>>,
}

impl TryFrom<ComplexFile> for DeltaComplex {
    type Error = ComplexError;

    fn try_from(f: ComplexFile) -> Result<Self, ComplexError> {
        DeltaComplex::build(f.vertices, f.edges, f.faces, f.mode)
    }
}

impl From<DeltaComplex> for ComplexFile {
    fn from(k: DeltaComplex) -> Self {
        ComplexFile {
            vertices: k.num_vertices,
            edges: k.edges,
            faces: k.faces,
            mode: k.mode,
        }
    }
}

/// Link of a vertex, assembled from the corners at that vertex.
///
/// The link graph has one node per edge-end at the vertex and one arc per
/// corner, joining the ends of the two sides that meet at the corner.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub corners: Vec<Corner>,
    /// Edge-ends at the vertex as `(edge, is_tail_end)`.
    pub ends: Vec<(usize, bool)>,
    /// For each corner, the two indices into `ends` it joins.
    pub arcs: Vec<[usize; 2]>,
    /// For each corner, the sides of its face not touching that corner
    /// (the opposite edge for a triangle).
    pub opposite: Vec<Vec<Side>>,
    pub connected: bool,
    pub shape: LinkShape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkShape {
    /// Closed cycle of the given length: interior vertex.
    Cycle(usize),
    /// Simple path with the given number of arcs: boundary vertex.
    Arc(usize),
    /// Anything else (several components, branching).
    Other,
    /// Vertex lies in no face.
    Empty,
}

/// Closed star of a vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Star {
    pub faces: Vec<usize>,
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
}

impl DeltaComplex {
    /// Validates the combinatorics and derives incidence tables.
    pub fn build(
        num_vertices: usize,
        edges: Vec<[usize; 2]>,
        faces: Vec<Vec<Side>>,
        mode: Mode,
    ) -> Result<Self, ComplexError> {
        for (e, &[t, h]) in edges.iter().enumerate() {
            for v in [t, h] {
                if v >= num_vertices {
                    return Err(ComplexError::DanglingVertex { edge: e, vertex: v });
                }
            }
        }
        let mut edge_slots = vec![Vec::new(); edges.len()];
        for (fi, face) in faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(ComplexError::ShortFace {
                    face: fi,
                    len: face.len(),
                });
            }
            for (i, s) in face.iter().enumerate() {
                if s.edge >= edges.len() {
                    return Err(ComplexError::DanglingEdge {
                        face: fi,
                        edge: s.edge,
                    });
                }
                edge_slots[s.edge].push((fi, i));
            }
            for i in 0..face.len() {
                let end = side_end(&edges, face[i]);
                let next = side_start(&edges, face[(i + 1) % face.len()]);
                if end != next {
                    return Err(ComplexError::InconsistentCycle {
                        face: fi,
                        side: i,
                        end,
                        next,
                    });
                }
            }
        }
        for (e, slots) in edge_slots.iter().enumerate() {
            match (mode, slots.len()) {
                (_, 0) => return Err(ComplexError::IsolatedEdge { edge: e }),
                (Mode::Surface, n) if n > 2 => {
                    return Err(ComplexError::SurfaceIncidence { edge: e, count: n })
                }
                _ => {}
            }
        }
        let mut vertex_edges = vec![Vec::new(); num_vertices];
        for (e, &[t, h]) in edges.iter().enumerate() {
            vertex_edges[t].push(e);
            if h != t {
                vertex_edges[h].push(e);
            }
        }
        Ok(Self {
            num_vertices,
            edges,
            faces,
            mode,
            edge_slots,
            vertex_edges,
        })
    }

    /// Builds a surface-mode complex from `(tail, head)` pairs and signed
    /// edge cycles, inferring the vertex count from the edges.
    pub fn from_lists(edges: &[[usize; 2]], faces: &[Vec<(usize, i8)>]) -> Result<Self, ComplexError> {
        let n = edges.iter().flatten().map(|&v| v + 1).max().unwrap_or(0);
        let faces = faces
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                f.iter()
                    .map(|&(e, s)| {
                        Side::try_from((e, s)).map_err(|_| ComplexError::BadDirection {
                            face: fi,
                            flag: s as i64,
                        })
                    })
                    .collect()
            })
            .collect::<Result<Vec<Vec<Side>>, _>>()?;
        Self::build(n, edges.to_vec(), faces, Mode::Surface)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn faces(&self) -> &[Vec<Side>] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &[Side] {
        &self.faces[f]
    }

    pub fn face_kind(&self, f: usize) -> FaceKind {
        FaceKind {
            arity: self.faces[f].len(),
        }
    }

    pub fn is_triangulation(&self) -> bool {
        self.faces.iter().all(|f| f.len() == 3)
    }

    pub fn is_quad_mesh(&self) -> bool {
        self.faces.iter().all(|f| f.len() == 4)
    }

    /// Fails unless every face has `arity` sides.
    pub fn require_arity(&self, arity: usize) -> Result<(), ComplexError> {
        match self.faces.iter().position(|f| f.len() != arity) {
            None => Ok(()),
            Some(face) => Err(ComplexError::WrongArity {
                face,
                expected: arity,
                got: self.faces[face].len(),
            }),
        }
    }

    /// Face slots `(face, side index)` containing edge `e`.
    pub fn edge_slots(&self, e: usize) -> &[(usize, usize)] {
        &self.edge_slots[e]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    /// Edges lying in exactly one face slot.
    pub fn boundary_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edge_slots[e].len() == 1)
            .collect()
    }

    /// Vertices touched by a boundary edge.
    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.boundary_edges()
            .into_iter()
            .flat_map(|e| self.edges[e])
            .collect()
    }

    pub fn side_start(&self, s: Side) -> usize {
        side_start(&self.edges, s)
    }

    pub fn side_end(&self, s: Side) -> usize {
        side_end(&self.edges, s)
    }

    /// Vertex sequence of face `f`; entry `i` is the start of side `i`.
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        self.faces[f].iter().map(|&s| self.side_start(s)).collect()
    }

    /// Index in the face cycle of the preferred vertex: the smallest vertex
    /// id on the face (first occurrence if the vertex repeats).
    pub fn preferred_corner(&self, f: usize) -> usize {
        let vs = self.face_vertices(f);
        let min = *vs.iter().min().expect("faces are nonempty");
        vs.iter().position(|&v| v == min).expect("minimum is present")
    }

    pub fn preferred_vertex(&self, f: usize) -> usize {
        self.face_vertices(f)
            .into_iter()
            .min()
            .expect("faces are nonempty")
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// All corners of the complex at vertex `v`.
    pub fn corners_at(&self, v: usize) -> Vec<Corner> {
        let mut out = Vec::new();
        for (fi, face) in self.faces.iter().enumerate() {
            for (i, &s) in face.iter().enumerate() {
                if self.side_start(s) == v {
                    out.push(Corner { face: fi, index: i });
                }
            }
        }
        out
    }

    pub fn star(&self, v: usize) -> Star {
        let faces: BTreeSet<usize> = self.corners_at(v).into_iter().map(|c| c.face).collect();
        let mut edges: BTreeSet<usize> = self.vertex_edges[v].iter().copied().collect();
        let mut vertices: BTreeSet<usize> = BTreeSet::from([v]);
        for &f in &faces {
            for &s in &self.faces[f] {
                edges.insert(s.edge);
                vertices.extend(self.edges[s.edge]);
            }
        }
        for &e in &self.vertex_edges[v] {
            vertices.extend(self.edges[e]);
        }
        Star {
            faces: faces.into_iter().collect(),
            edges: edges.into_iter().collect(),
            vertices: vertices.into_iter().collect(),
        }
    }

    pub fn link(&self, v: usize) -> Link {
        let corners = self.corners_at(v);
        let mut ends: Vec<(usize, bool)> = Vec::new();
        let end_index = |key: (usize, bool), ends: &mut Vec<(usize, bool)>| {
            ends.iter().position(|&k| k == key).unwrap_or_else(|| {
                ends.push(key);
                ends.len() - 1
            })
        };
        let mut arcs = Vec::with_capacity(corners.len());
        let mut opposite = Vec::with_capacity(corners.len());
        for c in &corners {
            let face = &self.faces[c.face];
            let n = face.len();
            let outgoing = face[c.index];
            let incoming = face[(c.index + n - 1) % n];
            // the outgoing side leaves v at its start, the incoming one arrives at its end
            let a = end_index((outgoing.edge, outgoing.forward), &mut ends);
            let b = end_index((incoming.edge, !incoming.forward), &mut ends);
            arcs.push([a, b]);
            opposite.push((1..n - 1).map(|k| face[(c.index + k) % n]).collect());
        }
        let (connected, shape) = link_shape(ends.len(), &arcs);
        Link {
            corners,
            ends,
            arcs,
            opposite,
            connected,
            shape,
        }
    }

    /// Serializes to the JSON complex format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("complexes serialize")
    }
}

fn side_start(edges: &[[usize; 2]], s: Side) -> usize {
    let [t, h] = edges[s.edge];
    if s.forward {
        t
    } else {
        h
    }
}

fn side_end(edges: &[[usize; 2]], s: Side) -> usize {
    let [t, h] = edges[s.edge];
    if s.forward {
        h
    } else {
        t
    }
}

fn link_shape(nodes: usize, arcs: &[[usize; 2]]) -> (bool, LinkShape) {
    if arcs.is_empty() {
        return (true, LinkShape::Empty);
    }
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut degree = vec![0usize; nodes];
    for &[a, b] in arcs {
        degree[a] += 1;
        degree[b] += 1;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let root = find(&mut parent, 0);
    let connected = (0..nodes).all(|x| find(&mut parent, x) == root);
    let shape = if !connected || degree.iter().any(|&d| d > 2) {
        LinkShape::Other
    } else if degree.iter().all(|&d| d == 2) {
        LinkShape::Cycle(arcs.len())
    } else if degree.iter().filter(|&&d| d == 1).count() == 2 {
        LinkShape::Arc(arcs.len())
    } else {
        LinkShape::Other
    };
    (connected, shape)
}

/// Standard quadrilateral subdivision of an annulus with `n` quads.
///
/// Vertices `0..n` form the bottom circle and `n..2n` the top. Edge `i` runs
/// along the bottom from `i` to `i + 1`, edge `n + i` along the top, and rung
/// `2n + i` from `i` up to `n + i`.
pub fn annulus_quad_complex(n: usize) -> Result<DeltaComplex, ComplexError> {
    if n < 3 {
        return Err(ComplexError::Invalid(format!(
            "an annulus needs at least 3 quads, got {n}"
        )));
    }
    let mut edges = Vec::with_capacity(3 * n);
    for i in 0..n {
        edges.push([i, (i + 1) % n]);
    }
    for i in 0..n {
        edges.push([n + i, n + (i + 1) % n]);
    }
    for i in 0..n {
        edges.push([i, n + i]);
    }
    let faces = (0..n)
        .map(|i| {
            vec![
                Side::fwd(i),
                Side::fwd(2 * n + (i + 1) % n),
                Side::bwd(n + i),
                Side::bwd(2 * n + i),
            ]
        })
        .collect();
    DeltaComplex::build(2 * n, edges, faces, Mode::Surface)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn torus() -> DeltaComplex {
        DeltaComplex::from_lists(
            &[[0, 0], [0, 0], [0, 0]],
            &[vec![(0, 1), (1, 1), (2, -1)], vec![(1, 1), (0, 1), (2, -1)]],
        )
        .unwrap()
    }

    fn wheel(n: usize) -> DeltaComplex {
        // centre 0, rim 1..=n; spokes 0..n, rim edges n..2n
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push([0, i + 1]);
        }
        for i in 0..n {
            edges.push([i + 1, (i + 1) % n + 1]);
        }
        let faces: Vec<Vec<(usize, i8)>> = (0..n)
            .map(|i| vec![(i, 1), (n + i, 1), ((i + 1) % n, -1)])
            .collect();
        DeltaComplex::from_lists(&edges, &faces).unwrap()
    }

    #[test]
    fn torus_has_zero_euler_characteristic() {
        let k = torus();
        assert_eq!(k.euler_characteristic(), 0);
        assert!(k.boundary_edges().is_empty());
        let star = k.star(0);
        assert_eq!(star.faces, vec![0, 1]);
        assert_eq!(k.link(0).shape, LinkShape::Cycle(6));
    }

    #[test]
    fn pillow_is_a_sphere() {
        let k = DeltaComplex::from_lists(
            &[[0, 1], [1, 2], [0, 2]],
            &[vec![(0, 1), (1, 1), (2, -1)], vec![(2, 1), (1, -1), (0, -1)]],
        )
        .unwrap();
        assert_eq!(k.euler_characteristic(), 2);
        assert!(k.boundary_edges().is_empty());
    }

    #[test]
    fn inconsistent_cycle_is_rejected() {
        let err = DeltaComplex::from_lists(&[[0, 1], [1, 2], [0, 2]], &[vec![(0, 1), (1, 1), (2, 1)]])
            .unwrap_err();
        assert!(matches!(err, ComplexError::InconsistentCycle { .. }));
    }

    #[test]
    fn surface_mode_rejects_three_face_edges() {
        let edges = vec![[0, 1], [1, 2], [2, 0], [1, 3], [3, 0], [1, 4], [4, 0]];
        let faces = vec![
            vec![Side::fwd(0), Side::fwd(1), Side::fwd(2)],
            vec![Side::fwd(0), Side::fwd(3), Side::fwd(4)],
            vec![Side::fwd(0), Side::fwd(5), Side::fwd(6)],
        ];
        assert!(matches!(
            DeltaComplex::build(5, edges.clone(), faces.clone(), Mode::Surface),
            Err(ComplexError::SurfaceIncidence { edge: 0, count: 3 })
        ));
        assert!(DeltaComplex::build(5, edges, faces, Mode::Skeleton).is_ok());
    }

    #[test]
    fn wheel_star_and_link() {
        let k = wheel(6);
        let star = k.star(0);
        assert_eq!(star.faces.len(), 6);
        let link = k.link(0);
        assert_eq!(link.shape, LinkShape::Cycle(6));
        assert!(link.connected);
        // the edge opposite the centre in each triangle is a rim edge
        for opp in &link.opposite {
            assert_eq!(opp.len(), 1);
            assert!(opp[0].edge >= 6);
        }
        assert_eq!(k.link(1).shape, LinkShape::Arc(2));
        assert_eq!(k.boundary_vertices().len(), 6);
    }

    #[test]
    fn preferred_vertex_is_minimum() {
        let k = wheel(4);
        for f in 0..k.num_faces() {
            assert_eq!(k.preferred_vertex(f), 0);
            assert_eq!(k.face_vertices(f)[k.preferred_corner(f)], 0);
        }
    }

    #[test]
    fn annulus_counts() {
        let k = annulus_quad_complex(3).unwrap();
        assert_eq!((k.num_vertices(), k.num_edges(), k.num_faces()), (6, 9, 3));
        assert_eq!(k.euler_characteristic(), 0);
        assert_eq!(annulus_quad_complex(4).unwrap().euler_characteristic(), 0);
        assert!(annulus_quad_complex(2).is_err());
        assert!(k.is_quad_mesh());
        assert_eq!(k.boundary_edges().len(), 6);
    }

    #[test]
    fn json_round_trip() {
        let k = torus();
        let text = k.to_json();
        assert_eq!(
            text,
            r#"{"vertices":1,"edges":[[0,0],[0,0],[0,0]],"faces":[[[0,1],[1,1],[2,-1]],[[1,1],[0,1],[2,-1]]],"mode":"surface"}"#
        );
        let back: DeltaComplex = serde_json::from_str(&text).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<DeltaComplex>(r#"{"vertices":1,"edges":[[0,0]],"faces":[[[0,2],[0,1],[0,1]]]}"#).is_err());
    }
}

//! Simplicial maps into geodesic targets and the functionals evaluated on
//! them.
//!
//! A map is stored as one model-space point per vertex plus one deck
//! element per edge. The image of edge `e = (t, h)` is the geodesic from
//! `p(t)` to `g_e · p(h)`, so `L_e = d(p(t), g_e · p(h))`.

mod area;
mod standard;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, DeltaComplex, Side};
use crate::metric::{cyclic_area, neighbour_sum, MetricError, SimplicialMetric};
use crate::targets::{DeckElement, DeckSpec, Point, SharedTarget, TargetError};

pub use area::{
    face_corner_angles, riemannian_area, triangle_angles, triangle_area, CornerAngles,
};
pub use standard::{standard_annulus_map, standard_type_map, MarkedAnnulus};

/// Tolerance for the face cocycle condition on deck matrices.
pub const COCYCLE_TOL: f64 = 1e-9;

/// An edge of zero domain length whose image is at most this long is
/// treated as mapped to a point.
pub const ZERO_IMAGE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("map has {got} vertex images, complex has {expected} vertices")]
    ImageCount { expected: usize, got: usize },
    #[error("map has {got} edge decks, complex has {expected} edges")]
    DeckCount { expected: usize, got: usize },
    #[error("vertex {vertex}: {source}")]
    BadImage { vertex: usize, source: TargetError },
    #[error("edge {edge}: {source}")]
    BadDeck { edge: usize, source: TargetError },
    #[error("deck elements around face {face} do not compose to the identity")]
    Cocycle { face: usize },
    #[error("incidence mismatch: {0}")]
    Incidence(String),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Energy value; infinite when a zero-length edge has a positive image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub fn value(self) -> f64 {
        match self {
            Energy::Finite(x) => x,
            Energy::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Energy::Finite(x) => Some(x),
            Energy::Infinite => None,
        }
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Finite(x) => write!(f, "{x}"),
            Energy::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for Energy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Energy::Finite(x) => s.serialize_f64(*x),
            Energy::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// Stretch factor of one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stretch {
    Finite(f64),
    Infinite,
}

impl Stretch {
    pub fn value(self) -> f64 {
        match self {
            Stretch::Finite(x) => x,
            Stretch::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Stretch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Stretch::Finite(x) => s.serialize_f64(*x),
            Stretch::Infinite => s.serialize_str("infinite"),
        }
    }
}

pub type StretchProfile = Vec<Stretch>;

/// Stretch of an edge with domain length `l` and image length `big_l`.
pub fn stretch(l: f64, big_l: f64) -> Stretch {
    if l > 0.0 {
        Stretch::Finite(big_l / l)
    } else if big_l <= ZERO_IMAGE_TOL {
        Stretch::Finite(0.0)
    } else {
        Stretch::Infinite
    }
}

/// Both evaluations of the simplicial energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyForms {
    /// `½ Σ_corners (σ_i² + σ_j²) l_i l_j`.
    pub corner_sum: Energy,
    /// `Σ_edges w_e L_e²`.
    pub edge_sum: Energy,
}

impl EnergyForms {
    /// Relative disagreement between the two forms (zero if both infinite).
    pub fn relative_gap(&self) -> f64 {
        match (self.corner_sum, self.edge_sum) {
            (Energy::Finite(a), Energy::Finite(b)) => {
                let scale = a.abs().max(b.abs());
                if scale == 0.0 {
                    0.0
                } else {
                    (a - b).abs() / scale
                }
            }
            (Energy::Infinite, Energy::Infinite) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub vertex_images: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_decks: Option<Vec<DeckSpec>>,
}

#[derive(Clone, Debug)]
pub struct SimplicialMap {
    target: SharedTarget,
    images: Vec<Point>,
    decks: Vec<DeckElement>,
}

impl SimplicialMap {
    /// Validates images and decks, and checks the face cocycle condition.
    pub fn new(
        k: &DeltaComplex,
        target: SharedTarget,
        images: Vec<Point>,
        decks: Vec<DeckElement>,
    ) -> Result<Self, MapError> {
        if images.len() != k.num_vertices() {
            return Err(MapError::ImageCount {
                expected: k.num_vertices(),
                got: images.len(),
            });
        }
        if decks.len() != k.num_edges() {
            return Err(MapError::DeckCount {
                expected: k.num_edges(),
                got: decks.len(),
            });
        }
        let images = images
            .iter()
            .enumerate()
            .map(|(vertex, p)| {
                target
                    .normalize_point(p)
                    .map_err(|source| MapError::BadImage { vertex, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (edge, g) in decks.iter().enumerate() {
            if !g.is_identity() && !target.has_deck_group() {
                return Err(MapError::BadDeck {
                    edge,
                    source: TargetError::NonIdentityDeck(g.to_string()),
                });
            }
        }
        let map = Self {
            target,
            images,
            decks,
        };
        map.check_cocycle(k)?;
        Ok(map)
    }

    /// Map with identity decks.
    pub fn with_identity_decks(
        k: &DeltaComplex,
        target: SharedTarget,
        images: Vec<Point>,
    ) -> Result<Self, MapError> {
        Self::new(k, target, images, vec![DeckElement::Identity; k.num_edges()])
    }

    /// Every vertex sent to `p`, identity decks.
    pub fn constant(k: &DeltaComplex, target: SharedTarget, p: Point) -> Result<Self, MapError> {
        Self::with_identity_decks(k, target, vec![p; k.num_vertices()])
    }

    pub fn from_file(k: &DeltaComplex, target: SharedTarget, file: &MapFile) -> Result<Self, MapError> {
        let images = file.vertex_images.iter().cloned().map(Point).collect();
        let decks = match &file.edge_decks {
            None => vec![DeckElement::Identity; k.num_edges()],
            Some(specs) => specs
                .iter()
                .enumerate()
                .map(|(edge, s)| {
                    target
                        .parse_deck(s)
                        .map_err(|source| MapError::BadDeck { edge, source })
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        Self::new(k, target, images, decks)
    }

    pub fn to_file(&self) -> MapFile {
        let decks: Vec<DeckSpec> = self.decks.iter().map(|g| self.target.encode_deck(g)).collect();
        MapFile {
            vertex_images: self.images.iter().map(|p| p.0.clone()).collect(),
            edge_decks: if self.decks.iter().all(DeckElement::is_identity) {
                None
            } else {
                Some(decks)
            },
        }
    }

    pub fn target(&self) -> &SharedTarget {
        &self.target
    }

    pub fn images(&self) -> &[Point] {
        &self.images
    }

    pub fn image(&self, v: usize) -> &Point {
        &self.images[v]
    }

    pub fn decks(&self) -> &[DeckElement] {
        &self.decks
    }

    pub fn deck(&self, e: usize) -> &DeckElement {
        &self.decks[e]
    }

    /// Same decks, new vertex images (assumed already normalized).
    pub(crate) fn with_images_unchecked(&self, images: Vec<Point>) -> Self {
        Self {
            target: self.target.clone(),
            images,
            decks: self.decks.clone(),
        }
    }

    /// Same decks, new vertex images, validated.
    pub fn with_images(&self, images: Vec<Point>) -> Result<Self, MapError> {
        let images = images
            .iter()
            .enumerate()
            .map(|(vertex, p)| {
                self.target
                    .normalize_point(p)
                    .map_err(|source| MapError::BadImage { vertex, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.with_images_unchecked(images))
    }

    /// `g_e · p(head)`, the head of edge `e` in the tail's frame.
    pub fn head_lift(&self, k: &DeltaComplex, e: usize) -> Point {
        let [_, h] = k.edge(e);
        if self.decks[e].is_identity() {
            self.images[h].clone()
        } else {
            self.target
                .deck_apply(&self.decks[e], &self.images[h])
                .expect("decks were validated against the target")
        }
    }

    pub fn edge_length(&self, k: &DeltaComplex, e: usize) -> f64 {
        let [t, _] = k.edge(e);
        self.target.distance(&self.images[t], &self.head_lift(k, e))
    }

    /// Image length of every edge.
    pub fn edge_lengths(&self, k: &DeltaComplex) -> Vec<f64> {
        (0..k.num_edges()).map(|e| self.edge_length(k, e)).collect()
    }

    /// Signed deck product around face `f`.
    fn face_holonomy(&self, k: &DeltaComplex, f: usize) -> Result<DeckElement, TargetError> {
        let t = &self.target;
        let mut h = DeckElement::Identity;
        for &s in k.face(f) {
            let g = self.side_deck(s)?;
            h = t.deck_compose(&h, &g)?;
        }
        Ok(h)
    }

    /// Deck of a directed side: `g_e` forward, `g_e^-1` backward.
    pub fn side_deck(&self, s: Side) -> Result<DeckElement, TargetError> {
        let g = &self.decks[s.edge];
        if s.forward || g.is_identity() {
            Ok(g.clone())
        } else {
            self.target.deck_inverse(g)
        }
    }

    pub fn check_cocycle(&self, k: &DeltaComplex) -> Result<(), MapError> {
        if !self.target.has_deck_group() {
            return Ok(());
        }
        for f in 0..k.num_faces() {
            let h = self.face_holonomy(k, f)?;
            if !self
                .target
                .decks_equal(&h, &DeckElement::Identity, COCYCLE_TOL)
            {
                return Err(MapError::Cocycle { face: f });
            }
        }
        Ok(())
    }

    /// Frames `H_i` along face `f` starting at corner `start`: the lift of
    /// the face's `i`-th vertex after `start` is `H_i · p(v)`.
    pub fn face_frames(
        &self,
        k: &DeltaComplex,
        f: usize,
        start: usize,
    ) -> Result<Vec<DeckElement>, TargetError> {
        let face = k.face(f);
        let n = face.len();
        let mut frames = Vec::with_capacity(n);
        let mut h = DeckElement::Identity;
        for i in 0..n {
            frames.push(h.clone());
            let s = face[(start + i) % n];
            let g = self.side_deck(s)?;
            if !g.is_identity() {
                h = self.target.deck_compose(&h, &g)?;
            }
        }
        Ok(frames)
    }

    /// Lifts of the vertices of face `f` into one sheet, starting at corner
    /// `start` (which keeps its stored image).
    pub fn face_lift(&self, k: &DeltaComplex, f: usize, start: usize) -> Result<Vec<Point>, TargetError> {
        let face = k.face(f);
        let n = face.len();
        let frames = self.face_frames(k, f, start)?;
        (0..n)
            .map(|i| {
                let v = k.side_start(face[(start + i) % n]);
                if frames[i].is_identity() {
                    Ok(self.images[v].clone())
                } else {
                    self.target.deck_apply(&frames[i], &self.images[v])
                }
            })
            .collect()
    }

    /// Image areas: cyclic adjacent products of image lengths.
    pub fn simplicial_area(&self, k: &DeltaComplex) -> f64 {
        cyclic_area(k, &self.edge_lengths(k))
    }

    pub fn stretch_factors(&self, k: &DeltaComplex, l: &SimplicialMetric) -> StretchProfile {
        self.edge_lengths(k)
            .iter()
            .zip(l.lengths())
            .map(|(&big, &small)| stretch(small, big))
            .collect()
    }

    /// Simplicial energy in both the corner-sum and the edge-sum forms.
    pub fn energy_forms(&self, k: &DeltaComplex, l: &SimplicialMetric) -> Result<EnergyForms, MapError> {
        l.check_count(k)?;
        let big = self.edge_lengths(k);
        Ok(energy_forms_from_lengths(k, l.lengths(), &big))
    }

    /// Simplicial energy (corner-sum form).
    pub fn energy(&self, k: &DeltaComplex, l: &SimplicialMetric) -> Result<Energy, MapError> {
        l.check_count(k)?;
        let big = self.edge_lengths(k);
        Ok(corner_energy(k, l.lengths(), &big))
    }

    /// Two-energy of a 2-skeleton; the corner sum runs over every face slot.
    pub fn energy2(&self, k: &DeltaComplex, l: &SimplicialMetric) -> Result<Energy, MapError> {
        self.energy(k, l)
    }

    /// Two-volume of the image of a 2-skeleton.
    pub fn volume2(&self, k: &DeltaComplex) -> f64 {
        self.simplicial_area(k)
    }

    pub fn is_conformal(&self, k: &DeltaComplex, l: &SimplicialMetric, tol: f64) -> ConformalVerdict {
        conformal_verdict(k, l.lengths(), &self.stretch_factors(k, l), tol)
    }

    /// Moves vertex `v` to `h · p(v)` and adjusts incident decks so that
    /// every image length is unchanged.
    pub fn gauge_transform(&self, k: &DeltaComplex, v: usize, h: &DeckElement) -> Result<Self, MapError> {
        if h.is_identity() {
            return Ok(self.clone());
        }
        let t = &self.target;
        let h_inv = t.deck_inverse(h)?;
        let mut decks = self.decks.clone();
        for &e in k.vertex_edges(v) {
            let [tail, head] = k.edge(e);
            let mut g = decks[e].clone();
            if tail == v {
                g = t.deck_compose(h, &g)?;
            }
            if head == v {
                g = t.deck_compose(&g, &h_inv)?;
            }
            decks[e] = g;
        }
        let mut images = self.images.clone();
        images[v] = t.deck_apply(h, &images[v])?;
        Ok(Self {
            target: self.target.clone(),
            images,
            decks,
        })
    }
}

/// Two-volume of a metric on a 2-skeleton.
pub fn volume2_metric(k: &DeltaComplex, l: &SimplicialMetric) -> f64 {
    cyclic_area(k, l.lengths())
}

/// `σ² l_i l_j` for the corner between sides with lengths `li`, `lj`, where
/// `big_i` is the image length of side `i`. Zero when `l_i = 0`. Evaluated
/// as `L_i · σ_i · l_j` so that `σ_i = 1` reproduces `L_i l_j` bit for bit.
fn corner_term(li: f64, lj: f64, big_i: f64) -> f64 {
    if li > 0.0 {
        big_i * (big_i / li) * lj
    } else {
        0.0
    }
}

pub(crate) fn has_infinite_stretch(l: &[f64], big: &[f64]) -> bool {
    l.iter().zip(big).any(|(&a, &b)| a == 0.0 && b > ZERO_IMAGE_TOL)
}

pub(crate) fn corner_energy(k: &DeltaComplex, l: &[f64], big: &[f64]) -> Energy {
    if has_infinite_stretch(l, big) {
        return Energy::Infinite;
    }
    // summed face by face, in the same order as `cyclic_area`
    let total = k
        .faces()
        .iter()
        .map(|face| {
            let n = face.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (face[i].edge, face[(i + 1) % n].edge);
                    0.5 * (corner_term(l[a], l[b], big[a]) + corner_term(l[b], l[a], big[b]))
                })
                .sum::<f64>()
        })
        .sum();
    Energy::Finite(total)
}

pub(crate) fn edge_energy(k: &DeltaComplex, l: &[f64], big: &[f64]) -> Energy {
    if has_infinite_stretch(l, big) {
        return Energy::Infinite;
    }
    let total = (0..k.num_edges())
        .filter(|&e| l[e] > 0.0)
        .map(|e| neighbour_sum(k, l, e) / (2.0 * l[e]) * big[e] * big[e])
        .sum();
    Energy::Finite(total)
}

pub(crate) fn energy_forms_from_lengths(k: &DeltaComplex, l: &[f64], big: &[f64]) -> EnergyForms {
    EnergyForms {
        corner_sum: corner_energy(k, l, big),
        edge_sum: edge_energy(k, l, big),
    }
}

/// Stretch statistics of one component of the positive-length subcomplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentStretch {
    pub edges: Vec<usize>,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalVerdict {
    pub components: Vec<ComponentStretch>,
    /// Largest `σ_max − σ_min` over components (infinite if any σ is).
    pub max_deviation: f64,
    pub conformal: bool,
}

/// Components are formed by positive-length edges that are consecutive
/// sides of some face.
pub(crate) fn conformal_verdict(
    k: &DeltaComplex,
    l: &[f64],
    sigma: &[Stretch],
    tol: f64,
) -> ConformalVerdict {
    let ne = k.num_edges();
    let mut parent: Vec<usize> = (0..ne).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for face in k.faces() {
        let n = face.len();
        for i in 0..n {
            let (a, b) = (face[i].edge, face[(i + 1) % n].edge);
            if l[a] > 0.0 && l[b] > 0.0 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for e in (0..ne).filter(|&e| l[e] > 0.0) {
        let r = find(&mut parent, e);
        groups.entry(r).or_default().push(e);
    }
    let infinite = sigma.iter().any(|s| matches!(s, Stretch::Infinite));
    let components: Vec<ComponentStretch> = groups
        .into_values()
        .map(|edges| {
            let vals = edges.iter().map(|&e| sigma[e].value());
            let sigma_min = vals.clone().fold(f64::INFINITY, f64::min);
            let sigma_max = vals.fold(f64::NEG_INFINITY, f64::max);
            ComponentStretch {
                edges,
                sigma_min,
                sigma_max,
            }
        })
        .collect();
    let max_deviation = if infinite {
        f64::INFINITY
    } else {
        components
            .iter()
            .map(|c| c.sigma_max - c.sigma_min)
            .fold(0.0, f64::max)
    };
    ConformalVerdict {
        conformal: max_deviation <= tol,
        components,
        max_deviation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::DeltaComplex;
    use crate::targets::{make_target, TargetSpec};

    fn triangle() -> DeltaComplex {
        DeltaComplex::from_lists(&[[0, 1], [1, 2], [0, 2]], &[vec![(0, 1), (1, 1), (2, -1)]]).unwrap()
    }

    fn euclid(dim: usize) -> SharedTarget {
        make_target(&TargetSpec::Euclidean { dim }).unwrap()
    }

    fn equilateral_map(scale: f64) -> SimplicialMap {
        let h = 3f64.sqrt() / 2.0;
        SimplicialMap::with_identity_decks(
            &triangle(),
            euclid(2),
            vec![
                Point(vec![0.0, 0.0]),
                Point(vec![scale, 0.0]),
                Point(vec![0.5 * scale, h * scale]),
            ],
        )
        .unwrap()
    }

    fn torus_map() -> (DeltaComplex, SimplicialMap) {
        let k = DeltaComplex::from_lists(
            &[[0, 0], [0, 0], [0, 0]],
            &[vec![(0, 1), (1, 1), (2, -1)], vec![(1, 1), (0, 1), (2, -1)]],
        )
        .unwrap();
        let t = make_target(&TargetSpec::FlatTorus { dim: 2 }).unwrap();
        let decks = vec![
            DeckElement::Translation(vec![1, 0]),
            DeckElement::Translation(vec![0, 1]),
            DeckElement::Translation(vec![1, 1]),
        ];
        let f = SimplicialMap::new(&k, t, vec![Point(vec![0.0, 0.0])], decks).unwrap();
        (k, f)
    }

    #[test]
    fn isometric_equilateral_energy_equals_area() {
        let k = triangle();
        let l = SimplicialMetric::uniform(3, 1.0).unwrap();
        let f = equilateral_map(1.0);
        let e = f.energy_forms(&k, &l).unwrap();
        assert!((e.corner_sum.value() - 3.0).abs() < 1e-12);
        assert!(e.relative_gap() < 1e-12);
        assert!((f.simplicial_area(&k) - 3.0).abs() < 1e-12);
        assert!(f.is_conformal(&k, &l, 1e-12).conformal);
    }

    #[test]
    fn uniform_double_stretch_quadruples_energy() {
        let k = triangle();
        let l = SimplicialMetric::uniform(3, 1.0).unwrap();
        let e = equilateral_map(2.0).energy(&k, &l).unwrap().value();
        assert!((e - 12.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_conventions() {
        let k = triangle();
        let f = SimplicialMap::with_identity_decks(
            &k,
            euclid(1),
            vec![Point(vec![0.0]), Point(vec![0.5]), Point(vec![0.5])],
        )
        .unwrap();
        // edge 0 has image length 1/2
        let l = SimplicialMetric::new(vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(f.energy(&k, &l).unwrap(), Energy::Infinite);
        assert_eq!(f.stretch_factors(&k, &l)[0], Stretch::Infinite);
        // edge 1 has image length 0
        let l = SimplicialMetric::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.stretch_factors(&k, &l)[1], Stretch::Finite(0.0));
        let e = f.energy_forms(&k, &l).unwrap();
        assert!(e.corner_sum.is_finite() && e.relative_gap() < 1e-12);
    }

    #[test]
    fn torus_lengths_and_cocycle() {
        let (k, f) = torus_map();
        let big = f.edge_lengths(&k);
        assert_eq!(big[0], 1.0);
        assert_eq!(big[1], 1.0);
        assert!((big[2] - 2f64.sqrt()).abs() < 1e-15);
        let bad = SimplicialMap::new(
            &k,
            f.target().clone(),
            vec![Point(vec![0.0, 0.0])],
            vec![
                DeckElement::Translation(vec![1, 0]),
                DeckElement::Translation(vec![0, 1]),
                DeckElement::Translation(vec![2, 1]),
            ],
        );
        assert!(matches!(bad, Err(MapError::Cocycle { .. })));
    }

    #[test]
    fn gauge_transform_preserves_lengths() {
        let (k, f) = torus_map();
        let g = f.gauge_transform(&k, 0, &DeckElement::Translation(vec![1, 0])).unwrap();
        assert_eq!(g.image(0), &Point(vec![1.0, 0.0]));
        assert_eq!(g.edge_lengths(&k), f.edge_lengths(&k));
        assert!(g.check_cocycle(&k).is_ok());
        let same = f.gauge_transform(&k, 0, &DeckElement::Identity).unwrap();
        assert_eq!(same.images(), f.images());
    }

    #[test]
    fn conformal_per_component() {
        // two triangles sharing only a vertex: separate components
        let k = DeltaComplex::from_lists(
            &[[0, 1], [1, 2], [0, 2], [0, 3], [3, 4], [0, 4]],
            &[vec![(0, 1), (1, 1), (2, -1)], vec![(3, 1), (4, 1), (5, -1)]],
        )
        .unwrap();
        let l = [1.0; 6];
        let sig: Vec<Stretch> = [1.0, 1.0, 1.0, 3.0, 3.0, 3.0].iter().map(|&s| Stretch::Finite(s)).collect();
        let v = conformal_verdict(&k, &l, &sig, 1e-12);
        assert!(v.conformal);
        assert_eq!(v.components.len(), 2);
        let sig: Vec<Stretch> = [1.0, 1.0, 2.0, 3.0, 3.0, 3.0].iter().map(|&s| Stretch::Finite(s)).collect();
        assert!(!conformal_verdict(&k, &l, &sig, 1e-12).conformal);
    }

    #[test]
    fn skeleton_energy_counts_every_slot() {
        use crate::complex::{Mode, Side};
        // edge 0 shared by three triangles
        let edges = vec![[0, 1], [1, 2], [0, 2], [1, 3], [0, 3], [1, 4], [0, 4]];
        let faces = vec![
            vec![Side::fwd(0), Side::fwd(1), Side::bwd(2)],
            vec![Side::fwd(0), Side::fwd(3), Side::bwd(4)],
            vec![Side::fwd(0), Side::fwd(5), Side::bwd(6)],
        ];
        let k = DeltaComplex::build(5, edges, faces, Mode::Skeleton).unwrap();
        let l = SimplicialMetric::uniform(7, 1.0).unwrap();
        // every edge stretched by 2: E2 = 4 * V2, V2(l) = 9
        let t = euclid(3);
        let base = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let mut images: Vec<Point> = base.iter().map(|c| Point(c.to_vec())).collect();
        let h = 3f64.sqrt() / 2.0;
        for ang in [0.0f64, 2.0, 4.0] {
            images.push(Point(vec![0.5, h * ang.cos(), h * ang.sin()]));
        }
        let images: Vec<Point> = images
            .into_iter()
            .map(|p| Point(p.0.iter().map(|c| 2.0 * c).collect()))
            .collect();
        let f = SimplicialMap::with_identity_decks(&k, t, images).unwrap();
        assert_eq!(volume2_metric(&k, &l), 9.0);
        let e2 = f.energy2(&k, &l).unwrap().value();
        assert!((e2 - 36.0).abs() < 1e-12, "{e2}");
        assert!((f.volume2(&k) - 36.0).abs() < 1e-12);
        // edge 0 sits in 3 slots: weight (3 * 2) / 2 = 3
        assert_eq!(crate::metric::edge_weight(&k, &l, 0).unwrap(), 3.0);
    }

    #[test]
    fn area_independent_of_metric() {
        let k = triangle();
        let f = equilateral_map(1.3);
        let a1 = f.simplicial_area(&k);
        let _ = f.energy(&k, &SimplicialMetric::uniform(3, 2.0).unwrap());
        assert_eq!(a1.to_bits(), f.simplicial_area(&k).to_bits());
    }

    #[test]
    fn map_file_round_trip() {
        let (k, f) = torus_map();
        let file = f.to_file();
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(text, r#"{"vertex_images":[[0.0,0.0]],"edge_decks":[[1,0],[0,1],[1,1]]}"#);
        let back = SimplicialMap::from_file(&k, f.target().clone(), &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.decks(), f.decks());
    }
}

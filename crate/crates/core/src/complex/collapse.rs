//! Collapse of the zero-length subcomplex of a quasi-metric.
//!
//! Each component of zero-length edges is shrunk to one vertex. Faces lose
//! their zero sides; faces with no side left disappear and faces with two
//! sides left (2-gons) are flattened by identifying their two edges.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::{ComplexError, DeltaComplex, Side};
use crate::metric::SimplicialMetric;
use crate::smap::{MapError, SimplicialMap, COCYCLE_TOL, ZERO_IMAGE_TOL};
use crate::targets::DeckElement;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapseError {
    #[error("edge {edge} has zero length but image length {image_length:e}")]
    ZeroEdgeWithImage { edge: usize, image_length: f64 },
    #[error("zero-length component containing vertex {vertex} is not contractible: {reason}")]
    NonContractible { vertex: usize, reason: String },
    #[error("2-gon on face {face} would identify an edge with its own reverse")]
    TwistedTwoGon { face: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Map(#[from] MapError),
}

impl From<crate::targets::TargetError> for CollapseError {
    fn from(e: crate::targets::TargetError) -> Self {
        CollapseError::Map(e.into())
    }
}

impl From<crate::metric::MetricError> for CollapseError {
    fn from(e: crate::metric::MetricError) -> Self {
        CollapseError::Map(e.into())
    }
}

#[derive(Clone, Debug)]
pub struct CollapseOutcome {
    pub complex: DeltaComplex,
    pub metric: SimplicialMetric,
    pub map: SimplicialMap,
    /// New vertex id of every old vertex.
    pub vertex_map: Vec<usize>,
    /// New edge of every old edge and whether orientation is kept; `None`
    /// for collapsed edges.
    pub edge_map: Vec<Option<(usize, bool)>>,
    pub stats: CollapseStats,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseStats {
    pub collapsed_edges: usize,
    pub removed_faces: usize,
    pub flattened_two_gons: usize,
    pub euler_before: i64,
    pub euler_after: i64,
    /// `Σ L_i L_j` over flattened 2-gons: the energy carried by their
    /// corners, which has no counterpart in the quotient.
    pub two_gon_energy: f64,
}

/// Collapses the zero-length edges of `l` together with the faces all of
/// whose sides have zero length.
///
/// Every component of the zero subcomplex must be contractible: it has
/// Euler characteristic 1 and every closed loop in it has identity deck
/// holonomy under `f`. Each zero edge must map to a point.
pub fn collapse_zero_subcomplex(
    k: &DeltaComplex,
    l: &SimplicialMetric,
    f: &SimplicialMap,
) -> Result<CollapseOutcome, CollapseError> {
    l.check_count(k)?;
    let t = f.target().clone();
    let zero: Vec<bool> = l.lengths().iter().map(|&x| x == 0.0).collect();
    let big = f.edge_lengths(k);
    for e in 0..k.num_edges() {
        if zero[e] && big[e] > ZERO_IMAGE_TOL {
            return Err(CollapseError::ZeroEdgeWithImage {
                edge: e,
                image_length: big[e],
            });
        }
    }

    // Spread deck offsets over each zero component: p(v) = o_v · p(root).
    let nv = k.num_vertices();
    let mut root: Vec<Option<usize>> = vec![None; nv];
    let mut offset: Vec<DeckElement> = vec![DeckElement::Identity; nv];
    let mut comp_counts: BTreeMap<usize, (i64, i64, i64)> = BTreeMap::new();
    for start in 0..nv {
        if root[start].is_some() {
            continue;
        }
        root[start] = Some(start);
        let mut stack = vec![start];
        let mut counts = (1i64, 0i64, 0i64);
        while let Some(v) = stack.pop() {
            for &e in k.vertex_edges(v) {
                if !zero[e] {
                    continue;
                }
                let [tail, head] = k.edge(e);
                let g = f.deck(e);
                // o_tail = g · o_head
                let (other, implied) = if tail == v && head != v {
                    (head, t.deck_compose(&t.deck_inverse(g)?, &offset[v])?)
                } else if head == v && tail != v {
                    (tail, t.deck_compose(g, &offset[v])?)
                } else {
                    continue;
                };
                if root[other].is_none() {
                    root[other] = Some(start);
                    offset[other] = implied;
                    counts.0 += 1;
                    stack.push(other);
                }
            }
        }
        comp_counts.insert(start, counts);
    }
    let root: Vec<usize> = root.into_iter().map(|r| r.expect("every vertex visited")).collect();
    for e in (0..k.num_edges()).filter(|&e| zero[e]) {
        let [tail, head] = k.edge(e);
        comp_counts.get_mut(&root[tail]).expect("root exists").1 += 1;
        let expected = t.deck_compose(f.deck(e), &offset[head])?;
        if !t.decks_equal(&offset[tail], &expected, COCYCLE_TOL) {
            return Err(CollapseError::NonContractible {
                vertex: root[tail],
                reason: format!("loop through edge {e} has nontrivial deck holonomy"),
            });
        }
    }
    let all_zero_face = |fi: usize| k.face(fi).iter().all(|s| zero[s.edge]);
    for fi in (0..k.num_faces()).filter(|&fi| all_zero_face(fi)) {
        let v = k.side_start(k.face(fi)[0]);
        comp_counts.get_mut(&root[v]).expect("root exists").2 += 1;
    }
    for (&r, &(cv, ce, cf)) in &comp_counts {
        if cv - ce + cf != 1 {
            return Err(CollapseError::NonContractible {
                vertex: r,
                reason: format!("component has Euler characteristic {}", cv - ce + cf),
            });
        }
    }

    // New vertices are the component roots, in order of old id.
    let mut new_id = vec![usize::MAX; nv];
    let mut roots = Vec::new();
    for v in 0..nv {
        if root[v] == v {
            new_id[v] = roots.len();
            roots.push(v);
        }
    }
    let vertex_map: Vec<usize> = (0..nv).map(|v| new_id[root[v]]).collect();

    // Redirected decks so that lengths are measured from component roots.
    let mut decks: Vec<DeckElement> = Vec::with_capacity(k.num_edges());
    for e in 0..k.num_edges() {
        let [tail, head] = k.edge(e);
        let g = t.deck_compose(&t.deck_inverse(&offset[tail])?, f.deck(e))?;
        decks.push(t.deck_compose(&g, &offset[head])?);
    }

    // Faces without zero sides; identify the two edges of each 2-gon.
    // `alias[e] = (e', same)`: side (e, +) equals side (e', + if same else -).
    let mut alias: Vec<(usize, bool)> = (0..k.num_edges()).map(|e| (e, true)).collect();
    fn resolve(alias: &mut [(usize, bool)], e: usize) -> (usize, bool) {
        let (mut cur, mut same) = (e, true);
        while alias[cur].0 != cur {
            let (next, s) = alias[cur];
            same = same == s;
            cur = next;
        }
        alias[e] = (cur, same);
        (cur, same)
    }
    let mut kept_faces: Vec<Vec<Side>> = Vec::new();
    let mut stats = CollapseStats {
        collapsed_edges: zero.iter().filter(|&&z| z).count(),
        removed_faces: 0,
        flattened_two_gons: 0,
        euler_before: k.euler_characteristic(),
        euler_after: 0,
        two_gon_energy: 0.0,
    };
    for (fi, face) in k.faces().iter().enumerate() {
        let sides: Vec<Side> = face.iter().copied().filter(|s| !zero[s.edge]).collect();
        match sides.len() {
            0 => stats.removed_faces += 1,
            2 => {
                stats.removed_faces += 1;
                stats.flattened_two_gons += 1;
                stats.two_gon_energy += big[sides[0].edge] * big[sides[1].edge];
                let (r1, s1) = resolve(&mut alias, sides[0].edge);
                let (r2, s2) = resolve(&mut alias, sides[1].edge);
                // absolute directions of the two sides on their representatives
                let d1 = sides[0].forward == s1;
                let d2 = sides[1].forward == s2;
                if r1 == r2 {
                    if d1 == d2 {
                        return Err(CollapseError::TwistedTwoGon { face: fi });
                    }
                    continue;
                }
                // (r2, d2) traverses the same path as (r1, !d1)
                let (keep, gone) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
                alias[gone] = (keep, d1 != d2);
            }
            1 => {
                return Err(CollapseError::Complex(ComplexError::Invalid(format!(
                    "face {fi} keeps a single positive side, which violates the polygon inequality"
                ))))
            }
            _ => kept_faces.push(sides),
        }
    }

    // Surviving edges: positive length and not aliased away.
    let mut edge_map: Vec<Option<(usize, bool)>> = vec![None; k.num_edges()];
    let mut new_edges = Vec::new();
    let mut new_lengths = Vec::new();
    let mut new_decks = Vec::new();
    for e in 0..k.num_edges() {
        if !zero[e] && resolve(&mut alias, e).0 == e {
            edge_map[e] = Some((new_edges.len(), true));
            let [tail, head] = k.edge(e);
            new_edges.push([vertex_map[tail], vertex_map[head]]);
            new_lengths.push(l.get(e));
            new_decks.push(decks[e].clone());
        }
    }
    for e in 0..k.num_edges() {
        if !zero[e] {
            let (r, same) = resolve(&mut alias, e);
            let (id, keep_dir) = edge_map[r].expect("representatives survive");
            edge_map[e] = Some((id, keep_dir == same));
        }
    }
    let faces: Vec<Vec<Side>> = kept_faces
        .into_iter()
        .map(|face| {
            face.into_iter()
                .map(|s| {
                    let (id, same) = edge_map[s.edge].expect("positive edges survive");
                    Side {
                        edge: id,
                        forward: s.forward == same,
                    }
                })
                .collect()
        })
        .collect();
    let complex = DeltaComplex::build(roots.len(), new_edges, faces, k.mode())?;
    stats.euler_after = complex.euler_characteristic();
    let metric = SimplicialMetric::new(new_lengths)?;
    let images = roots.iter().map(|&r| f.image(r).clone()).collect();
    let map = SimplicialMap::new(&complex, t, images, new_decks)?;
    Ok(CollapseOutcome {
        complex,
        metric,
        map,
        vertex_map,
        edge_map,
        stats,
    })
}

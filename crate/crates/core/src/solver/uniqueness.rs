use std::collections::VecDeque;

use serde::Serialize;

use super::{flow_to_harmonic, FlowConfig, FlowReport, SolverError};
use crate::complex::DeltaComplex;
use crate::metric::SimplicialMetric;
use crate::smap::{SimplicialMap, COCYCLE_TOL};
use crate::targets::DeckElement;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub max_distance: f64,
    /// Vertex where the distance is attained.
    pub witness: usize,
    pub reports: [FlowReport; 2],
}

/// Deck elements `h_v` with `g^b_e = h_tail · g^a_e · h_head^-1` on every
/// edge, normalized by `h = id` at the smallest vertex of each component.
/// `None` if the deck data of the two maps are not gauge equivalent.
pub fn gauge_alignment(
    k: &DeltaComplex,
    a: &SimplicialMap,
    b: &SimplicialMap,
) -> Result<Option<Vec<DeckElement>>, SolverError> {
    let t = a.target();
    let nv = k.num_vertices();
    let mut h: Vec<Option<DeckElement>> = vec![None; nv];
    for start in 0..nv {
        if h[start].is_some() {
            continue;
        }
        h[start] = Some(DeckElement::Identity);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let hv = h[v].clone().expect("queued vertices are assigned");
            for &e in k.vertex_edges(v) {
                let [tail, head] = k.edge(e);
                let (ga, gb) = (a.deck(e), b.deck(e));
                // h_head = (g^b)^-1 h_tail g^a  and  h_tail = g^b h_head (g^a)^-1
                let (other, value) = if tail == v {
                    let x = t.deck_compose(&t.deck_inverse(gb)?, &hv)?;
                    (head, t.deck_compose(&x, ga)?)
                } else {
                    let x = t.deck_compose(gb, &hv)?;
                    (tail, t.deck_compose(&x, &t.deck_inverse(ga)?)?)
                };
                match &h[other] {
                    None => {
                        h[other] = Some(value);
                        queue.push_back(other);
                    }
                    Some(existing) => {
                        if !t.decks_equal(existing, &value, COCYCLE_TOL) {
                            return Ok(None);
                        }
                    }
                }
            }
        }
    }
    Ok(Some(h.into_iter().map(|x| x.expect("all vertices visited")).collect()))
}

/// Flows both maps and measures how far apart the results are after
/// aligning their lifts.
///
/// Only meaningful for negatively curved manifold targets and maps whose
/// class is nontrivial, which the caller asserts; flat targets carry whole
/// families of harmonic maps and are refused.
pub fn uniqueness_probe(
    k: &DeltaComplex,
    f_a: &SimplicialMap,
    f_b: &SimplicialMap,
    l: &SimplicialMetric,
    cfg: &FlowConfig,
) -> Result<UniquenessReport, SolverError> {
    let t = f_a.target();
    if !t.is_manifold() {
        return Err(SolverError::Refused(
            "harmonic maps into metric trees are not unique in general".into(),
        ));
    }
    if t.curvature_upper_bound() >= 0.0 {
        return Err(SolverError::Refused(
            "flat targets admit translation families of harmonic maps".into(),
        ));
    }
    if f_a.target().spec() != f_b.target().spec() {
        return Err(SolverError::Config("the two maps have different targets".into()));
    }
    let Some(gauge) = gauge_alignment(k, f_a, f_b)? else {
        return Err(SolverError::Config(
            "the two maps are not in the same homotopy class".into(),
        ));
    };
    let (a, ra) = flow_to_harmonic(k, f_a, l, cfg)?;
    let (b, rb) = flow_to_harmonic(k, f_b, l, cfg)?;
    let mut max_distance = 0.0;
    let mut witness = 0;
    for (v, h) in gauge.iter().enumerate() {
        let pa = if h.is_identity() {
            a.image(v).clone()
        } else {
            t.deck_apply(h, a.image(v))?
        };
        let d = t.distance(&pa, b.image(v));
        if d > max_distance {
            max_distance = d;
            witness = v;
        }
    }
    Ok(UniquenessReport {
        max_distance,
        witness,
        reports: [ra, rb],
    })
}

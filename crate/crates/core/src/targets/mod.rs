//! Geodesic target spaces.
//!
//! Every target exposes the same interface: distances, constant-speed
//! geodesics, `log`/`exp` for manifold targets, and a deck group acting by
//! isometries on the model space. Quotient targets (flat tori, the genus-2
//! surface) are represented by their universal cover together with the deck
//! group; the homotopy class of an edge image is recorded as a deck element.

mod euclidean;
mod genus2;
pub mod hyperbolic;
mod tree;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use euclidean::{Euclidean, FlatTorus};
pub use genus2::{DeckWord, Genus2Octagon, BOUNDARY_WORD, MAX_WORD_LEN};
pub use hyperbolic::Hyperbolic;
pub use tree::MetricTree;

/// Coordinates of a point in the model space of a target.
///
/// Euclidean and torus points are plain coordinates, hyperbolic points are
/// hyperboloid coordinates `(x0, x1, ..)`, and tree points are
/// `[edge id, offset from the edge tail]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Tangent vector in ambient coordinates.
pub type TangentVector = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("malformed target: {0}")]
    Malformed(String),
    #[error("point has {got} coordinates, target expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation `{0}` is not supported on this target")]
    Unsupported(&'static str),
    #[error("target has no deck group; got non-identity element {0}")]
    NonIdentityDeck(String),
    #[error("bad deck element: {0}")]
    BadDeck(String),
    #[error("metric tree contains a cycle")]
    TreeCycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Euclidean,
    Hyperbolic,
    FlatTorus,
    Genus2Octagon,
    MetricTree,
}

/// Deck transformation of the universal cover of a quotient target.
#[derive(Clone, Debug, PartialEq)]
pub enum DeckElement {
    Identity,
    /// Integer translation of a flat torus `R^n / Z^n`.
    Translation(Vec<i64>),
    /// Word in the genus-2 surface group generators.
    Word(DeckWord),
}

impl DeckElement {
    pub fn is_identity(&self) -> bool {
        match self {
            DeckElement::Identity => true,
            DeckElement::Translation(t) => t.iter().all(|&c| c == 0),
            DeckElement::Word(w) => w.is_empty(),
        }
    }

    pub(crate) fn require_identity(&self) -> Result<(), TargetError> {
        if self.is_identity() {
            Ok(())
        } else {
            Err(TargetError::NonIdentityDeck(self.to_string()))
        }
    }
}

impl fmt::Display for DeckElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeckElement::Identity => write!(f, "id"),
            DeckElement::Translation(t) => write!(f, "{t:?}"),
            DeckElement::Word(w) => write!(f, "{w}"),
        }
    }
}

/// Serialized deck element: `"id"`, an integer vector, or a generator word
/// such as `"aB"` (`g1 g2^-1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeckSpec {
    Text(String),
    Vector(Vec<i64>),
}

impl DeckSpec {
    pub fn identity() -> Self {
        DeckSpec::Text("id".to_string())
    }

    fn parse_identity_only(&self) -> Result<DeckElement, TargetError> {
        match self {
            DeckSpec::Text(s) if s == "id" || s.is_empty() => Ok(DeckElement::Identity),
            DeckSpec::Vector(v) if v.iter().all(|&c| c == 0) => Ok(DeckElement::Identity),
            other => Err(TargetError::NonIdentityDeck(format!("{other:?}"))),
        }
    }
}

/// JSON description of a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetSpec {
    Euclidean {
        dim: usize,
    },
    Hyperbolic {
        dim: usize,
    },
    FlatTorus {
        dim: usize,
    },
    #[serde(rename = "genus2_octagon")]
    Genus2Octagon,
    MetricTree {
        num_vertices: usize,
        edges: Vec<[usize; 2]>,
        lengths: Vec<f64>,
    },
}

/// Uniform interface consumed by the energy code, the solver and the checks.
pub trait GeodesicTarget: Send + Sync + fmt::Debug {
    fn kind(&self) -> TargetKind;

    /// Intrinsic dimension.
    fn dim(&self) -> usize;

    /// Number of stored coordinates per point.
    fn ambient_dim(&self) -> usize;

    /// Validates a point and returns its canonical representative
    /// (hyperboloid points are re-projected onto the quadric).
    fn normalize_point(&self, p: &Point) -> Result<Point, TargetError>;

    fn distance(&self, p: &Point, q: &Point) -> f64;

    /// Constant-speed geodesic from `p` (t = 0) to `q` (t = 1).
    fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Point;

    fn log(&self, p: &Point, q: &Point) -> Result<TangentVector, TargetError>;

    fn exp(&self, p: &Point, v: &[f64]) -> Result<Point, TargetError>;

    fn tangent_norm(&self, p: &Point, v: &[f64]) -> f64;

    /// Inner product of two tangent vectors at `p`.
    fn tangent_dot(&self, p: &Point, u: &[f64], v: &[f64]) -> f64;

    /// Parallel transport of `v` from `p` to `q` along their geodesic.
    fn parallel_transport(&self, p: &Point, q: &Point, v: &[f64]) -> Result<TangentVector, TargetError>;

    /// Orthonormal basis of the tangent space at `p`.
    fn tangent_frame(&self, p: &Point) -> Result<Vec<TangentVector>, TargetError>;

    fn deck_apply(&self, g: &DeckElement, p: &Point) -> Result<Point, TargetError>;

    /// Differential of a deck isometry acting on an ambient tangent vector.
    fn deck_apply_vector(&self, g: &DeckElement, v: &[f64]) -> Result<TangentVector, TargetError>;

    /// `g ∘ h`.
    fn deck_compose(&self, g: &DeckElement, h: &DeckElement) -> Result<DeckElement, TargetError>;

    fn deck_inverse(&self, g: &DeckElement) -> Result<DeckElement, TargetError>;

    /// Equality as isometries (matrix comparison within `tol` for words).
    fn decks_equal(&self, g: &DeckElement, h: &DeckElement, tol: f64) -> bool;

    fn parse_deck(&self, spec: &DeckSpec) -> Result<DeckElement, TargetError>;

    fn encode_deck(&self, g: &DeckElement) -> DeckSpec;

    /// Upper bound on sectional curvature: `0` for flat targets, `-1` for
    /// hyperbolic ones, `-inf` for metric trees (CAT(0), no smooth bound).
    fn curvature_upper_bound(&self) -> f64;

    /// Constant curvature of the model space, `None` for metric trees.
    fn model_curvature(&self) -> Option<f64>;

    fn spec(&self) -> TargetSpec;

    fn is_manifold(&self) -> bool {
        self.kind() != TargetKind::MetricTree
    }

    fn has_deck_group(&self) -> bool {
        matches!(self.kind(), TargetKind::FlatTorus | TargetKind::Genus2Octagon)
    }
}

pub type SharedTarget = Arc<dyn GeodesicTarget>;

/// Human-readable curvature bound; trees have no smooth bound.
pub fn describe_curvature_bound(target: &dyn GeodesicTarget) -> String {
    let k = target.curvature_upper_bound();
    if k == f64::NEG_INFINITY {
        "CAT(0), no smooth bound".to_string()
    } else {
        format!("{k}")
    }
}

pub fn make_target(spec: &TargetSpec) -> Result<SharedTarget, TargetError> {
    Ok(match spec {
        TargetSpec::Euclidean { dim } => Arc::new(Euclidean::new(*dim)?),
        TargetSpec::Hyperbolic { dim } => Arc::new(Hyperbolic::new(*dim)?),
        TargetSpec::FlatTorus { dim } => Arc::new(FlatTorus::new(*dim)?),
        TargetSpec::Genus2Octagon => Arc::new(Genus2Octagon::new()?),
        TargetSpec::MetricTree {
            num_vertices,
            edges,
            lengths,
        } => Arc::new(MetricTree::new(*num_vertices, edges, lengths)?),
    })
}

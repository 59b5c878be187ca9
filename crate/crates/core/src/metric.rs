//! Simplicial metrics and quasi-metrics: per-edge lengths on a complex.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, DeltaComplex};
use crate::smap::SimplicialMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("edge {edge} has invalid length {value}")]
    BadLength { edge: usize, value: f64 },
    #[error("metric has {got} lengths, complex has {expected} edges")]
    CountMismatch { expected: usize, got: usize },
    #[error("edge {edge} has zero length, its weight is undefined")]
    ZeroLength { edge: usize },
    #[error("scale factor must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("image lengths violate the polygon inequality on face {face} by {excess:e}")]
    InducedViolation { face: usize, excess: f64 },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct MetricFile {
    lengths: Vec<f64>,
}

/// Nonnegative edge lengths, indexed by edge id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricFile", into = "MetricFile")]
pub struct SimplicialMetric {
    lengths: Vec<f64>,
}

impl TryFrom<MetricFile> for SimplicialMetric {
    type Error = MetricError;

    fn try_from(f: MetricFile) -> Result<Self, MetricError> {
        SimplicialMetric::new(f.lengths)
    }
}

impl From<SimplicialMetric> for MetricFile {
    fn from(m: SimplicialMetric) -> Self {
        MetricFile { lengths: m.lengths }
    }
}

impl SimplicialMetric {
    pub fn new(lengths: Vec<f64>) -> Result<Self, MetricError> {
        if let Some((edge, &value)) = lengths
            .iter()
            .enumerate()
            .find(|(_, l)| !(l.is_finite() && **l >= 0.0))
        {
            return Err(MetricError::BadLength { edge, value });
        }
        Ok(Self { lengths })
    }

    pub fn uniform(num_edges: usize, length: f64) -> Result<Self, MetricError> {
        Self::new(vec![length; num_edges])
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn get(&self, e: usize) -> f64 {
        self.lengths[e]
    }

    /// True iff some edge has length zero.
    pub fn is_quasi(&self) -> bool {
        self.lengths.iter().any(|&l| l == 0.0)
    }

    pub(crate) fn check_count(&self, k: &DeltaComplex) -> Result<(), MetricError> {
        if self.lengths.len() != k.num_edges() {
            return Err(MetricError::CountMismatch {
                expected: k.num_edges(),
                got: self.lengths.len(),
            });
        }
        Ok(())
    }
}

/// A side of a face longer than the sum of the other sides.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub face: usize,
    /// Index of the offending side in the face cycle.
    pub side: usize,
    pub edge: usize,
    /// `l(side) - sum of the others`, positive.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub quasi: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Polygon-inequality excess of every side of face `f` under `lengths`.
pub(crate) fn face_excesses(k: &DeltaComplex, f: usize, lengths: &[f64]) -> Vec<f64> {
    let face = k.face(f);
    (0..face.len())
        .map(|i| {
            let others: f64 = face
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| lengths[s.edge])
                .sum();
            lengths[face[i].edge] - others
        })
        .collect()
}

/// Checks the triangle/polygon inequality on every face, with no slack.
pub fn validate_metric(k: &DeltaComplex, l: &SimplicialMetric) -> Result<ValidationReport, MetricError> {
    l.check_count(k)?;
    let mut violations = Vec::new();
    for f in 0..k.num_faces() {
        for (side, excess) in face_excesses(k, f, &l.lengths).into_iter().enumerate() {
            if excess > 0.0 {
                violations.push(Violation {
                    face: f,
                    side,
                    edge: k.face(f)[side].edge,
                    excess,
                });
            }
        }
    }
    Ok(ValidationReport {
        violations,
        quasi: l.is_quasi(),
    })
}

/// Sum over faces of products of cyclically adjacent side lengths.
pub fn cyclic_area(k: &DeltaComplex, lengths: &[f64]) -> f64 {
    k.faces()
        .iter()
        .map(|face| {
            let n = face.len();
            (0..n)
                .map(|i| lengths[face[i].edge] * lengths[face[(i + 1) % n].edge])
                .sum::<f64>()
        })
        .sum()
}

/// Simplicial area of the domain metric.
pub fn simplicial_area(k: &DeltaComplex, l: &SimplicialMetric) -> f64 {
    cyclic_area(k, &l.lengths)
}

/// Area of a Euclidean triangle with the given side lengths; zero when
/// degenerate or when the lengths violate the triangle inequality.
pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        0.0
    } else {
        0.25 * p.sqrt()
    }
}

/// Total Euclidean (Heron) area of a triangulated metric.
pub fn euclidean_area(k: &DeltaComplex, l: &SimplicialMetric) -> Result<f64, MetricError> {
    k.require_arity(3)?;
    l.check_count(k)?;
    Ok(k.faces()
        .iter()
        .map(|f| heron(l.get(f[0].edge), l.get(f[1].edge), l.get(f[2].edge)))
        .sum())
}

/// Sum over all face slots of edge `e` of the two neighbouring side lengths.
pub(crate) fn neighbour_sum(k: &DeltaComplex, lengths: &[f64], e: usize) -> f64 {
    k.edge_slots(e)
        .iter()
        .map(|&(f, i)| {
            let face = k.face(f);
            let n = face.len();
            lengths[face[(i + n - 1) % n].edge] + lengths[face[(i + 1) % n].edge]
        })
        .sum()
}

/// Weight of a positive-length edge.
pub fn edge_weight(k: &DeltaComplex, l: &SimplicialMetric, e: usize) -> Result<f64, MetricError> {
    let le = l.get(e);
    if le == 0.0 {
        return Err(MetricError::ZeroLength { edge: e });
    }
    Ok(neighbour_sum(k, &l.lengths, e) / (2.0 * le))
}

/// Weights of all edges; `None` for zero-length edges.
pub fn edge_weights(k: &DeltaComplex, l: &SimplicialMetric) -> Result<Vec<Option<f64>>, MetricError> {
    l.check_count(k)?;
    Ok((0..k.num_edges())
        .map(|e| edge_weight(k, l, e).ok())
        .collect())
}

pub fn scale_metric(l: &SimplicialMetric, lambda: f64) -> Result<SimplicialMetric, MetricError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(MetricError::BadScale(lambda));
    }
    SimplicialMetric::new(l.lengths.iter().map(|x| x * lambda).collect())
}

/// Slack tolerated on the polygon inequality for image lengths, relative to
/// the face perimeter.
pub const INDUCED_TOL: f64 = 1e-9;

/// The quasi-metric whose lengths are the image lengths of `f`. Image
/// lengths at most `ZERO_IMAGE_TOL` become exact zeros.
///
/// Image lengths of a face are distances between points of one lift, so they
/// satisfy the polygon inequality up to rounding; a larger violation means
/// the target's distance function is wrong and is reported as an error.
pub fn induced_quasimetric(k: &DeltaComplex, f: &SimplicialMap) -> Result<SimplicialMetric, MetricError> {
    let mut lengths = f.edge_lengths(k);
    for x in &mut lengths {
        if *x <= crate::smap::ZERO_IMAGE_TOL {
            *x = 0.0;
        }
    }
    for face in 0..k.num_faces() {
        let perimeter: f64 = k.face(face).iter().map(|s| lengths[s.edge]).sum();
        let worst = face_excesses(k, face, &lengths)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > INDUCED_TOL * perimeter.max(1.0) {
            return Err(MetricError::InducedViolation {
                face,
                excess: worst,
            });
        }
    }
    SimplicialMetric::new(lengths)
}

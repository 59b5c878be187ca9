use super::{
    DeckElement, DeckSpec, GeodesicTarget, Point, TangentVector, TargetError, TargetKind,
    TargetSpec,
};

fn check_dim(dim: usize) -> Result<(), TargetError> {
    if dim == 0 {
        return Err(TargetError::Malformed("dimension must be positive".into()));
    }
    Ok(())
}

fn check_flat_point(p: &Point, dim: usize) -> Result<Point, TargetError> {
    if p.0.len() != dim {
        return Err(TargetError::DimensionMismatch {
            expected: dim,
            got: p.0.len(),
        });
    }
    if p.0.iter().any(|c| !c.is_finite()) {
        return Err(TargetError::Malformed(format!("non-finite point {:?}", p.0)));
    }
    Ok(p.clone())
}

fn flat_distance(p: &Point, q: &Point) -> f64 {
    p.0.iter()
        .zip(&q.0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn flat_geodesic(p: &Point, q: &Point, t: f64) -> Point {
    if t == 0.0 {
        return p.clone();
    }
    if t == 1.0 {
        return q.clone();
    }
    Point(p.0.iter().zip(&q.0).map(|(a, b)| a + t * (b - a)).collect())
}

fn flat_frame(dim: usize) -> Vec<TangentVector> {
    (0..dim)
        .map(|i| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        })
        .collect()
}

fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Euclidean space `R^n`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self, TargetError> {
        check_dim(dim)?;
        Ok(Self { dim })
    }
}

impl GeodesicTarget for Euclidean {
    fn kind(&self) -> TargetKind {
        TargetKind::Euclidean
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn normalize_point(&self, p: &Point) -> Result<Point, TargetError> {
        check_flat_point(p, self.dim)
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        flat_distance(p, q)
    }

    fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Point {
        flat_geodesic(p, q, t)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<TangentVector, TargetError> {
        Ok(q.0.iter().zip(&p.0).map(|(a, b)| a - b).collect())
    }

    fn exp(&self, p: &Point, v: &[f64]) -> Result<Point, TargetError> {
        Ok(Point(p.0.iter().zip(v).map(|(a, b)| a + b).collect()))
    }

    fn tangent_norm(&self, _p: &Point, v: &[f64]) -> f64 {
        euclidean_norm(v)
    }

    fn tangent_dot(&self, _p: &Point, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn parallel_transport(&self, _p: &Point, _q: &Point, v: &[f64]) -> Result<TangentVector, TargetError> {
        Ok(v.to_vec())
    }

    fn tangent_frame(&self, _p: &Point) -> Result<Vec<TangentVector>, TargetError> {
        Ok(flat_frame(self.dim))
    }

    fn deck_apply(&self, g: &DeckElement, p: &Point) -> Result<Point, TargetError> {
        g.require_identity()?;
        Ok(p.clone())
    }

    fn deck_apply_vector(&self, g: &DeckElement, v: &[f64]) -> Result<TangentVector, TargetError> {
        g.require_identity()?;
        Ok(v.to_vec())
    }

    fn deck_compose(&self, g: &DeckElement, h: &DeckElement) -> Result<DeckElement, TargetError> {
        g.require_identity()?;
        h.require_identity()?;
        Ok(DeckElement::Identity)
    }

    fn deck_inverse(&self, g: &DeckElement) -> Result<DeckElement, TargetError> {
        g.require_identity()?;
        Ok(DeckElement::Identity)
    }

    fn decks_equal(&self, g: &DeckElement, h: &DeckElement, _tol: f64) -> bool {
        g.is_identity() && h.is_identity()
    }

    fn parse_deck(&self, spec: &DeckSpec) -> Result<DeckElement, TargetError> {
        spec.parse_identity_only()
    }

    fn encode_deck(&self, _g: &DeckElement) -> DeckSpec {
        DeckSpec::identity()
    }

    fn curvature_upper_bound(&self) -> f64 {
        0.0
    }

    fn model_curvature(&self) -> Option<f64> {
        Some(0.0)
    }

    fn spec(&self) -> TargetSpec {
        TargetSpec::Euclidean { dim: self.dim }
    }
}

/// Flat torus `R^n / Z^n`, stored as its universal cover with integer
/// translations as deck group.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    dim: usize,
}

impl FlatTorus {
    pub fn new(dim: usize) -> Result<Self, TargetError> {
        check_dim(dim)?;
        Ok(Self { dim })
    }

    fn translation<'a>(&self, g: &'a DeckElement) -> Result<Option<&'a [i64]>, TargetError> {
        match g {
            DeckElement::Identity => Ok(None),
            DeckElement::Translation(t) if t.len() == self.dim => Ok(Some(t)),
            DeckElement::Translation(t) => Err(TargetError::BadDeck(format!(
                "translation {t:?} has wrong dimension for a {}-torus",
                self.dim
            ))),
            DeckElement::Word(w) => Err(TargetError::BadDeck(format!(
                "word {w} is not a torus translation"
            ))),
        }
    }

    fn as_vector(&self, g: &DeckElement) -> Result<Vec<i64>, TargetError> {
        Ok(self
            .translation(g)?
            .map(|t| t.to_vec())
            .unwrap_or_else(|| vec![0; self.dim]))
    }

    fn from_vector(v: Vec<i64>) -> DeckElement {
        if v.iter().all(|&c| c == 0) {
            DeckElement::Identity
        } else {
            DeckElement::Translation(v)
        }
    }
}

impl GeodesicTarget for FlatTorus {
    fn kind(&self) -> TargetKind {
        TargetKind::FlatTorus
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn normalize_point(&self, p: &Point) -> Result<Point, TargetError> {
        check_flat_point(p, self.dim)
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        flat_distance(p, q)
    }

    fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Point {
        flat_geodesic(p, q, t)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<TangentVector, TargetError> {
        Ok(q.0.iter().zip(&p.0).map(|(a, b)| a - b).collect())
    }

    fn exp(&self, p: &Point, v: &[f64]) -> Result<Point, TargetError> {
        Ok(Point(p.0.iter().zip(v).map(|(a, b)| a + b).collect()))
    }

    fn tangent_norm(&self, _p: &Point, v: &[f64]) -> f64 {
        euclidean_norm(v)
    }

    fn tangent_dot(&self, _p: &Point, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn parallel_transport(&self, _p: &Point, _q: &Point, v: &[f64]) -> Result<TangentVector, TargetError> {
        Ok(v.to_vec())
    }

    fn tangent_frame(&self, _p: &Point) -> Result<Vec<TangentVector>, TargetError> {
        Ok(flat_frame(self.dim))
    }

    fn deck_apply(&self, g: &DeckElement, p: &Point) -> Result<Point, TargetError> {
        Ok(match self.translation(g)? {
            None => p.clone(),
            Some(t) => Point(p.0.iter().zip(t).map(|(x, k)| x + *k as f64).collect()),
        })
    }

    fn deck_apply_vector(&self, g: &DeckElement, v: &[f64]) -> Result<TangentVector, TargetError> {
        self.translation(g)?;
        Ok(v.to_vec())
    }

    fn deck_compose(&self, g: &DeckElement, h: &DeckElement) -> Result<DeckElement, TargetError> {
        let a = self.as_vector(g)?;
        let b = self.as_vector(h)?;
        Ok(Self::from_vector(a.iter().zip(&b).map(|(x, y)| x + y).collect()))
    }

    fn deck_inverse(&self, g: &DeckElement) -> Result<DeckElement, TargetError> {
        let a = self.as_vector(g)?;
        Ok(Self::from_vector(a.iter().map(|x| -x).collect()))
    }

    fn decks_equal(&self, g: &DeckElement, h: &DeckElement, _tol: f64) -> bool {
        match (self.as_vector(g), self.as_vector(h)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    fn parse_deck(&self, spec: &DeckSpec) -> Result<DeckElement, TargetError> {
        match spec {
            DeckSpec::Vector(v) if v.len() == self.dim => Ok(Self::from_vector(v.clone())),
            DeckSpec::Vector(v) => Err(TargetError::BadDeck(format!(
                "translation {v:?} has wrong dimension for a {}-torus",
                self.dim
            ))),
            DeckSpec::Text(s) if s == "id" => Ok(DeckElement::Identity),
            DeckSpec::Text(s) => Err(TargetError::BadDeck(format!(
                "expected an integer vector or \"id\", got {s:?}"
            ))),
        }
    }

    fn encode_deck(&self, g: &DeckElement) -> DeckSpec {
        match g {
            DeckElement::Translation(t) => DeckSpec::Vector(t.clone()),
            _ => DeckSpec::identity(),
        }
    }

    fn curvature_upper_bound(&self) -> f64 {
        0.0
    }

    fn model_curvature(&self) -> Option<f64> {
        Some(0.0)
    }

    fn spec(&self) -> TargetSpec {
        TargetSpec::FlatTorus { dim: self.dim }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_translation_acts_by_isometry() {
        let t = FlatTorus::new(2).unwrap();
        let g = DeckElement::Translation(vec![1, 0]);
        let p = Point(vec![0.2, 0.5]);
        assert_eq!(t.deck_apply(&g, &p).unwrap(), Point(vec![1.2, 0.5]));
        let gi = t.deck_inverse(&g).unwrap();
        assert!(t.deck_compose(&g, &gi).unwrap().is_identity());
        let q = Point(vec![-0.7, 2.0]);
        let d0 = t.distance(&p, &q);
        let d1 = t.distance(&t.deck_apply(&g, &p).unwrap(), &t.deck_apply(&g, &q).unwrap());
        assert!((d0 - d1).abs() <= 1e-10);
    }

    #[test]
    fn torus_rejects_wrong_dimension_translation() {
        let t = FlatTorus::new(2).unwrap();
        assert!(t.parse_deck(&DeckSpec::Vector(vec![1, 0, 0])).is_err());
        assert!(t.parse_deck(&DeckSpec::Text("aB".into())).is_err());
    }
}

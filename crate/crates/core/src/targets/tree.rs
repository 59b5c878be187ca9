use super::{
    DeckElement, DeckSpec, GeodesicTarget, Point, TangentVector, TargetError, TargetKind,
    TargetSpec,
};

/// Where a tree point sits.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Loc {
    Vertex(usize),
    /// Edge id and offset from the edge's tail.
    Edge(usize, f64),
}

/// Finite metric tree with positive edge lengths.
///
/// Points are `[edge id, offset from tail]`; a vertex `v` may also be written
/// `[-(v + 1), 0]`, which is the only way to name a vertex of an edgeless tree.
#[derive(Debug, Clone)]
pub struct MetricTree {
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    lengths: Vec<f64>,
    /// All-pairs vertex distances.
    dist: Vec<Vec<f64>>,
    /// `toward[w][u]`: edge and next vertex on the path from `u` to `w`.
    toward: Vec<Vec<Option<(usize, usize)>>>,
}

impl MetricTree {
    pub fn new(num_vertices: usize, edges: &[[usize; 2]], lengths: &[f64]) -> Result<Self, TargetError> {
        if num_vertices == 0 {
            return Err(TargetError::Malformed("tree needs at least one vertex".into()));
        }
        if edges.len() != lengths.len() {
            return Err(TargetError::Malformed(format!(
                "{} edges but {} lengths",
                edges.len(),
                lengths.len()
            )));
        }
        let mut parent: Vec<usize> = (0..num_vertices).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_vertices];
        for (e, (&[u, v], &len)) in edges.iter().zip(lengths).enumerate() {
            if u >= num_vertices || v >= num_vertices {
                return Err(TargetError::Malformed(format!("edge {e} has an out-of-range vertex")));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(TargetError::Malformed(format!(
                    "edge {e} has non-positive length {len}"
                )));
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return Err(TargetError::TreeCycle);
            }
            parent[ru] = rv;
            adjacency[u].push((e, v));
            adjacency[v].push((e, u));
        }
        if edges.len() + 1 != num_vertices {
            return Err(TargetError::Malformed("tree is not connected".into()));
        }
        let mut dist = vec![vec![f64::INFINITY; num_vertices]; num_vertices];
        let mut toward = vec![vec![None; num_vertices]; num_vertices];
        for root in 0..num_vertices {
            dist[root][root] = 0.0;
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                for &(e, y) in &adjacency[x] {
                    if dist[root][y].is_infinite() {
                        dist[root][y] = dist[root][x] + lengths[e];
                        toward[root][y] = Some((e, x));
                        stack.push(y);
                    }
                }
            }
        }
        Ok(Self {
            num_vertices,
            edges: edges.to_vec(),
            lengths: lengths.to_vec(),
            dist,
            toward,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Canonical point for vertex `v`.
    pub fn vertex_point(&self, v: usize) -> Point {
        Point(vec![-(v as f64) - 1.0, 0.0])
    }

    /// Point at `offset` from the tail of edge `e`.
    pub fn edge_point(&self, e: usize, offset: f64) -> Point {
        Point(vec![e as f64, offset])
    }

    fn loc(&self, p: &Point) -> Loc {
        let id = p.0[0];
        if id < 0.0 {
            Loc::Vertex((-id) as usize - 1)
        } else {
            Loc::Edge(id as usize, p.0[1])
        }
    }

    /// Vertices bounding the segment holding the point, with distances to them.
    fn anchors(&self, loc: Loc) -> Vec<(usize, f64)> {
        match loc {
            Loc::Vertex(v) => vec![(v, 0.0)],
            Loc::Edge(e, t) => {
                let [u, v] = self.edges[e];
                vec![(u, t), (v, self.lengths[e] - t)]
            }
        }
    }

    fn best_anchors(&self, a: Loc, b: Loc) -> (f64, (usize, f64), (usize, f64)) {
        let mut best = (f64::INFINITY, (0, 0.0), (0, 0.0));
        for x in self.anchors(a) {
            for y in self.anchors(b) {
                let d = x.1 + self.dist[x.0][y.0] + y.1;
                if d < best.0 {
                    best = (d, x, y);
                }
            }
        }
        best
    }

    fn vertex_path(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        let mut x = from;
        while x != to {
            let (e, next) = self.toward[to][x].expect("tree is connected");
            path.push((e, next));
            x = next;
        }
        path
    }

    /// Offset of vertex `v` along edge `e`.
    fn offset_of(&self, e: usize, v: usize) -> f64 {
        if self.edges[e][0] == v {
            0.0
        } else {
            self.lengths[e]
        }
    }
}

impl GeodesicTarget for MetricTree {
    fn kind(&self) -> TargetKind {
        TargetKind::MetricTree
    }

    fn dim(&self) -> usize {
        1
    }

    fn ambient_dim(&self) -> usize {
        2
    }

    fn normalize_point(&self, p: &Point) -> Result<Point, TargetError> {
        if p.0.len() != 2 {
            return Err(TargetError::DimensionMismatch {
                expected: 2,
                got: p.0.len(),
            });
        }
        let (id, t) = (p.0[0], p.0[1]);
        if !id.is_finite() || id.fract() != 0.0 || !t.is_finite() {
            return Err(TargetError::Malformed(format!("bad tree point {:?}", p.0)));
        }
        if id < 0.0 {
            let v = (-id) as usize - 1;
            if v >= self.num_vertices || t != 0.0 {
                return Err(TargetError::Malformed(format!("bad tree vertex point {:?}", p.0)));
            }
            return Ok(p.clone());
        }
        let e = id as usize;
        if e >= self.edges.len() {
            return Err(TargetError::Malformed(format!("tree point on missing edge {e}")));
        }
        let len = self.lengths[e];
        if t < -1e-9 * len || t > len * (1.0 + 1e-9) {
            return Err(TargetError::Malformed(format!(
                "offset {t} outside edge {e} of length {len}"
            )));
        }
        Ok(Point(vec![id, t.clamp(0.0, len)]))
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (a, b) = (self.loc(p), self.loc(q));
        if let (Loc::Edge(e1, t1), Loc::Edge(e2, t2)) = (a, b) {
            if e1 == e2 {
                return (t1 - t2).abs();
            }
        }
        self.best_anchors(a, b).0
    }

    fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Point {
        if t == 0.0 {
            return p.clone();
        }
        if t == 1.0 {
            return q.clone();
        }
        let (a, b) = (self.loc(p), self.loc(q));
        if let (Loc::Edge(e1, t1), Loc::Edge(e2, t2)) = (a, b) {
            if e1 == e2 {
                return self.edge_point(e1, t1 + t * (t2 - t1));
            }
        }
        let (d, (u, du), (w, dw)) = self.best_anchors(a, b);
        let mut s = t * d;
        // leave p's edge
        if let Loc::Edge(e, off) = a {
            if s <= du {
                let end = self.offset_of(e, u);
                return self.edge_point(e, off + (end - off) * s / du);
            }
        }
        s -= du;
        let mut x = u;
        for (e, next) in self.vertex_path(u, w) {
            let len = self.lengths[e];
            if s <= len {
                let start = self.offset_of(e, x);
                let end = self.offset_of(e, next);
                return self.edge_point(e, start + (end - start) * s / len);
            }
            s -= len;
            x = next;
        }
        match b {
            Loc::Edge(e, off) if dw > 0.0 => {
                let start = self.offset_of(e, w);
                self.edge_point(e, start + (off - start) * (s / dw).min(1.0))
            }
            _ => q.clone(),
        }
    }

    fn log(&self, _p: &Point, _q: &Point) -> Result<TangentVector, TargetError> {
        Err(TargetError::Unsupported("log"))
    }

    fn exp(&self, _p: &Point, _v: &[f64]) -> Result<Point, TargetError> {
        Err(TargetError::Unsupported("exp"))
    }

    fn tangent_norm(&self, _p: &Point, v: &[f64]) -> f64 {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn tangent_dot(&self, _p: &Point, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn parallel_transport(&self, _p: &Point, _q: &Point, _v: &[f64]) -> Result<TangentVector, TargetError> {
        Err(TargetError::Unsupported("parallel_transport"))
    }

    fn tangent_frame(&self, _p: &Point) -> Result<Vec<TangentVector>, TargetError> {
        Err(TargetError::Unsupported("tangent_frame"))
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
        f64::NEG_INFINITY
    }

    fn model_curvature(&self) -> Option<f64> {
        None
    }

    fn spec(&self) -> TargetSpec {
        TargetSpec::MetricTree {
            num_vertices: self.num_vertices,
            edges: self.edges.clone(),
            lengths: self.lengths.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> MetricTree {
        MetricTree::new(4, &[[0, 1], [0, 2], [0, 3]], &[1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn star_leaves_are_two_apart() {
        let t = star();
        for i in 1..4 {
            for j in 1..4 {
                let d = t.distance(&t.vertex_point(i), &t.vertex_point(j));
                assert_eq!(d, if i == j { 0.0 } else { 2.0 });
            }
        }
        assert_eq!(t.distance(&t.edge_point(0, 1.0), &t.vertex_point(1)), 0.0);
    }

    #[test]
    fn geodesic_passes_through_centre() {
        let t = star();
        let p = t.edge_point(0, 0.5);
        let q = t.edge_point(2, 0.75);
        let d = t.distance(&p, &q);
        assert!((d - 1.25).abs() < 1e-15);
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let m = t.geodesic_eval(&p, &q, s);
            assert!((t.distance(&p, &m) - s * d).abs() < 1e-12, "s = {s}");
            assert!((t.distance(&m, &q) - (1.0 - s) * d).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn rejects_cycles_and_disconnected_input() {
        assert_eq!(
            MetricTree::new(3, &[[0, 1], [1, 2], [2, 0]], &[1.0; 3]).unwrap_err(),
            TargetError::TreeCycle
        );
        assert!(MetricTree::new(3, &[[0, 1]], &[1.0]).is_err());
        assert!(MetricTree::new(2, &[[0, 1]], &[0.0]).is_err());
    }

    #[test]
    fn point_validation() {
        let t = star();
        assert!(t.normalize_point(&Point(vec![0.0, 0.5])).is_ok());
        assert!(t.normalize_point(&Point(vec![3.0, 0.5])).is_err());
        assert!(t.normalize_point(&Point(vec![0.0, 1.5])).is_err());
        assert!(t.normalize_point(&Point(vec![-5.0, 0.0])).is_err());
    }
}

//! Closed genus-2 hyperbolic surface.
//!
//! The surface is the regular hyperbolic octagon with interior angles `π/4`
//! and boundary word `a b A B c d C D`, realised in the hyperboloid model of
//! `H^2`. Deck transformations are words in the generators `a, b, c, d`
//! (upper case denotes the inverse) acting by Lorentz matrices.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use super::hyperbolic::{self, check_hyperboloid_point};
use super::{
    DeckElement, DeckSpec, GeodesicTarget, Point, TangentVector, TargetError, TargetKind,
    TargetSpec,
};

/// Longest reduced word accepted as a deck element.
pub const MAX_WORD_LEN: usize = 64;

pub(crate) type M3 = [[f64; 3]; 3];

const IDENTITY: M3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Boundary word of the octagon, side `i` read from corner `i` to `i + 1`.
pub const BOUNDARY_WORD: &str = "abABcdCD";

fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mat_vec(a: &M3, v: &[f64]) -> Vec<f64> {
    (0..3).map(|i| (0..3).map(|k| a[i][k] * v[k]).sum()).collect()
}

/// Inverse of a Lorentz matrix: `J A^T J` with `J = diag(-1, 1, 1)`.
fn lorentz_inverse(a: &M3) -> M3 {
    let sign = [-1.0, 1.0, 1.0];
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = sign[i] * a[j][i] * sign[j];
        }
    }
    b
}

fn mat_close(a: &M3, b: &M3, tol: f64) -> bool {
    let scale = a
        .iter()
        .chain(b.iter())
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| (x - y).abs() <= tol * scale)
}

fn rotation(theta: f64) -> M3 {
    let (s, c) = theta.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn boost_x(t: f64) -> M3 {
    let (ch, sh) = (t.cosh(), t.sinh());
    [[ch, sh, 0.0], [sh, ch, 0.0], [0.0, 0.0, 1.0]]
}

/// Circumradius of the octagon: `cosh R = cot^2(π/8)`.
fn circumradius() -> f64 {
    let cot = 1.0 / (PI / 8.0).tan();
    (cot * cot).acosh()
}

/// Inradius of the octagon: `cosh r = cot(π/8)`.
fn inradius() -> f64 {
    (1.0 / (PI / 8.0).tan()).acosh()
}

fn corner_coords(k: usize) -> Vec<f64> {
    let r = circumradius();
    let theta = (k % 8) as f64 * PI / 4.0;
    vec![r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()]
}

fn side_angle(k: usize) -> f64 {
    k as f64 * PI / 4.0 + PI / 8.0
}

/// Isometry carrying side `j` onto side `k` with reversed orientation,
/// mapping the octagon onto its neighbour across side `k`.
fn side_pairing(j: usize, k: usize) -> M3 {
    let m = mat_mul(&rotation(side_angle(k)), &boost_x(2.0 * inradius()));
    let m = mat_mul(&m, &rotation(PI));
    mat_mul(&m, &rotation(-side_angle(j)))
}

/// Angle at corner `k` between the side to corner `k + 1` and the ray to the
/// centre, from the hyperbolic law of cosines.
fn corner_half_angle(k: usize) -> f64 {
    let o = hyperbolic::origin(2);
    let (p, q) = (corner_coords(k), corner_coords(k + 1));
    let side = hyperbolic::distance(&p, &q);
    let (rp, rq) = (hyperbolic::distance(&o, &p), hyperbolic::distance(&o, &q));
    ((side.cosh() * rp.cosh() - rq.cosh()) / (side.sinh() * rp.sinh()))
        .clamp(-1.0, 1.0)
        .acos()
}

struct Group {
    /// Matrices of `a, b, c, d`.
    gens: [M3; 4],
}

fn build_group() -> Result<Group, TargetError> {
    let pairs = [(0, 2), (1, 3), (4, 6), (5, 7)];
    let mut moves: Vec<M3> = Vec::new();
    for &(j, k) in &pairs {
        let t = side_pairing(j, k);
        moves.push(lorentz_inverse(&t));
        moves.push(t);
    }
    let c0 = corner_coords(0);
    let corners: Vec<Vec<f64>> = (0..8).map(corner_coords).collect();
    let mut found: Vec<Option<M3>> = vec![None; 8];
    found[0] = Some(IDENTITY);
    let mut seen: Vec<M3> = vec![IDENTITY];
    let mut queue: VecDeque<(M3, usize)> = VecDeque::from([(IDENTITY, 0)]);
    while let Some((m, depth)) = queue.pop_front() {
        if found.iter().all(Option::is_some) {
            break;
        }
        if depth >= 8 {
            continue;
        }
        for t in &moves {
            let n = mat_mul(&m, t);
            if seen.iter().any(|s| mat_close(s, &n, 1e-9)) {
                continue;
            }
            let image = mat_vec(&n, &c0);
            for (k, ck) in corners.iter().enumerate() {
                if found[k].is_none() && hyperbolic::distance(&image, ck) < 1e-9 {
                    found[k] = Some(n);
                }
            }
            seen.push(n);
            queue.push_back((n, depth + 1));
        }
    }
    // h_k with h_k C_0 = C_k, closing up with h_8 = id
    let mut corner_decks: Vec<M3> = Vec::with_capacity(9);
    for (k, f) in found.into_iter().enumerate() {
        corner_decks.push(f.ok_or_else(|| {
            TargetError::Malformed(format!("no deck element carries corner 0 to corner {k}"))
        })?);
    }
    corner_decks.push(IDENTITY);
    let side: Vec<M3> = (0..8)
        .map(|i| mat_mul(&lorentz_inverse(&corner_decks[i]), &corner_decks[i + 1]))
        .collect();
    let gens = [side[0], side[1], side[4], side[5]];
    for (i, &(fwd, back)) in [(0, 2), (1, 3), (4, 6), (5, 7)].iter().enumerate() {
        if !mat_close(&side[back], &lorentz_inverse(&side[fwd]), 1e-9) {
            return Err(TargetError::Malformed(format!(
                "side pairing for generator {} is inconsistent",
                (b'a' + i as u8) as char
            )));
        }
    }
    let angle_sum: f64 = (0..8).map(|k| 2.0 * corner_half_angle(k)).sum();
    if (angle_sum - 2.0 * PI).abs() > 1e-9 {
        return Err(TargetError::Malformed(format!(
            "octagon vertex angles sum to {angle_sum}, expected 2π"
        )));
    }
    let group = Group { gens };
    let relator = word_matrix_with(&group.gens, BOUNDARY_WORD.as_bytes());
    if !mat_close(&relator, &IDENTITY, 1e-9) {
        return Err(TargetError::Malformed(
            "surface group relator does not evaluate to the identity".into(),
        ));
    }
    Ok(group)
}

fn group() -> &'static Result<Group, TargetError> {
    static GROUP: OnceLock<Result<Group, TargetError>> = OnceLock::new();
    GROUP.get_or_init(build_group)
}

fn letter_matrix(gens: &[M3; 4], letter: u8) -> M3 {
    let m = gens[(letter.to_ascii_lowercase() - b'a') as usize];
    if letter.is_ascii_uppercase() {
        lorentz_inverse(&m)
    } else {
        m
    }
}

fn word_matrix_with(gens: &[M3; 4], letters: &[u8]) -> M3 {
    letters
        .iter()
        .fold(IDENTITY, |acc, &l| mat_mul(&acc, &letter_matrix(gens, l)))
}

fn inverse_letter(l: u8) -> u8 {
    if l.is_ascii_uppercase() {
        l.to_ascii_lowercase()
    } else {
        l.to_ascii_uppercase()
    }
}

/// Cyclic conjugates of the relator and of its inverse.
fn relator_rotations() -> &'static [Vec<u8>] {
    static ROTATIONS: OnceLock<Vec<Vec<u8>>> = OnceLock::new();
    ROTATIONS.get_or_init(|| {
        let r = BOUNDARY_WORD.as_bytes();
        let r_inv: Vec<u8> = r.iter().rev().map(|&l| inverse_letter(l)).collect();
        let mut out = Vec::with_capacity(2 * r.len());
        for base in [r.to_vec(), r_inv] {
            for shift in 0..base.len() {
                out.push(base[shift..].iter().chain(&base[..shift]).copied().collect());
            }
        }
        out
    })
}

fn free_reduce(letters: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut reduced: Vec<u8> = Vec::new();
    for l in letters {
        if reduced.last() == Some(&inverse_letter(l)) {
            reduced.pop();
        } else {
            reduced.push(l);
        }
    }
    reduced
}

/// Dehn's algorithm for the surface group: free reduction, then repeated
/// replacement of any subword that is more than half of a cyclic conjugate
/// of the relator (or its inverse) by the inverse of the remaining part.
/// Every replacement shortens the word, and a word reduces to the empty
/// word exactly when it represents the identity.
fn dehn_reduce(letters: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut word = free_reduce(letters);
    let n = BOUNDARY_WORD.len();
    'outer: loop {
        for i in 0..word.len() {
            for r in relator_rotations() {
                let m = word[i..].iter().zip(r).take_while(|(a, b)| a == b).count();
                if 2 * m > n {
                    let replacement = r[m..].iter().rev().map(|&l| inverse_letter(l));
                    let rest: Vec<u8> = word[i + m..].to_vec();
                    word.truncate(i);
                    word = free_reduce(word.into_iter().chain(replacement).chain(rest));
                    continue 'outer;
                }
            }
        }
        return word;
    }
}

/// Word in `a, b, c, d` and their inverses `A, B, C, D`, reduced by Dehn's
/// algorithm, with its Lorentz matrix cached.
#[derive(Clone, Debug)]
pub struct DeckWord {
    letters: Vec<u8>,
    matrix: M3,
}

impl PartialEq for DeckWord {
    fn eq(&self, other: &Self) -> bool {
        self.same_element(other)
    }
}

impl DeckWord {
    pub fn identity() -> Self {
        Self {
            letters: Vec::new(),
            matrix: IDENTITY,
        }
    }

    /// Parses and freely reduces a word; `"id"` and `""` are the identity.
    pub fn parse(text: &str) -> Result<Self, TargetError> {
        if text == "id" {
            return Ok(Self::identity());
        }
        if let Some(bad) = text.bytes().find(|b| !matches!(b, b'a'..=b'd' | b'A'..=b'D')) {
            return Err(TargetError::BadDeck(format!(
                "unexpected letter {:?} in word {text:?}",
                bad as char
            )));
        }
        Self::from_letters(text.bytes())
    }

    fn from_letters(letters: impl IntoIterator<Item = u8>) -> Result<Self, TargetError> {
        let reduced = dehn_reduce(letters);
        if reduced.len() > MAX_WORD_LEN {
            return Err(TargetError::BadDeck(format!(
                "reduced word has {} letters, limit is {MAX_WORD_LEN}",
                reduced.len()
            )));
        }
        let gens = &group().as_ref().map_err(Clone::clone)?.gens;
        let matrix = word_matrix_with(gens, &reduced);
        Ok(Self {
            letters: reduced,
            matrix,
        })
    }

    /// Whether the two words name the same group element.
    pub fn same_element(&self, other: &Self) -> bool {
        self.letters == other.letters
            || dehn_reduce(
                self.letters
                    .iter()
                    .rev()
                    .map(|&l| inverse_letter(l))
                    .chain(other.letters.iter().copied()),
            )
            .is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.letters).expect("words are ASCII")
    }

    pub fn compose(&self, other: &Self) -> Result<Self, TargetError> {
        Self::from_letters(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|&l| inverse_letter(l)).collect(),
            matrix: lorentz_inverse(&self.matrix),
        }
    }

    pub(crate) fn matrix(&self) -> &M3 {
        &self.matrix
    }
}

impl fmt::Display for DeckWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            write!(f, "id")
        } else {
            write!(f, "{}", self.as_str())
        }
    }
}

/// Genus-2 surface with its universal cover `H^2`.
#[derive(Debug, Clone)]
pub struct Genus2Octagon {
    _private: (),
}

impl Genus2Octagon {
    /// Builds the target, checking the side pairings and the relator.
    pub fn new() -> Result<Self, TargetError> {
        group().as_ref().map_err(Clone::clone)?;
        Ok(Self { _private: () })
    }

    /// Corner `k` of the fundamental octagon, `k` taken mod 8.
    pub fn corner(&self, k: usize) -> Point {
        Point(corner_coords(k))
    }

    /// Centre of the octagon.
    pub fn centre(&self) -> Point {
        Point(hyperbolic::origin(2))
    }

    /// Deck word carrying corner 0 to corner `k`: the prefix of length `k` of
    /// the boundary word.
    pub fn corner_word(&self, k: usize) -> DeckWord {
        DeckWord::parse(&BOUNDARY_WORD[..k % 8]).expect("boundary prefixes are valid words")
    }

    fn word<'a>(&self, g: &'a DeckElement) -> Result<Option<&'a DeckWord>, TargetError> {
        match g {
            DeckElement::Identity => Ok(None),
            DeckElement::Word(w) => Ok(Some(w)),
            DeckElement::Translation(t) if t.iter().all(|&c| c == 0) => Ok(None),
            DeckElement::Translation(t) => Err(TargetError::BadDeck(format!(
                "translation {t:?} is not a genus-2 deck element"
            ))),
        }
    }

    fn matrix(&self, g: &DeckElement) -> Result<M3, TargetError> {
        Ok(self.word(g)?.map(|w| *w.matrix()).unwrap_or(IDENTITY))
    }

    fn wrap(w: DeckWord) -> DeckElement {
        if w.is_empty() {
            DeckElement::Identity
        } else {
            DeckElement::Word(w)
        }
    }
}

impl GeodesicTarget for Genus2Octagon {
    fn kind(&self) -> TargetKind {
        TargetKind::Genus2Octagon
    }

    fn dim(&self) -> usize {
        2
    }

    fn ambient_dim(&self) -> usize {
        3
    }

    fn normalize_point(&self, p: &Point) -> Result<Point, TargetError> {
        check_hyperboloid_point(p, 2)
    }

    fn distance(&self, p: &Point, q: &Point) -> f64 {
        hyperbolic::distance(&p.0, &q.0)
    }

    fn geodesic_eval(&self, p: &Point, q: &Point, t: f64) -> Point {
        hyperbolic::geodesic_eval(p, q, t)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<TangentVector, TargetError> {
        Ok(hyperbolic::log(&p.0, &q.0))
    }

    fn exp(&self, p: &Point, v: &[f64]) -> Result<Point, TargetError> {
        Ok(Point(hyperbolic::exp(&p.0, v)))
    }

    fn tangent_norm(&self, _p: &Point, v: &[f64]) -> f64 {
        hyperbolic::tangent_norm(v)
    }

    fn tangent_dot(&self, _p: &Point, u: &[f64], v: &[f64]) -> f64 {
        hyperbolic::minkowski_dot(u, v)
    }

    fn parallel_transport(&self, p: &Point, q: &Point, v: &[f64]) -> Result<TangentVector, TargetError> {
        Ok(hyperbolic::transport(&p.0, &q.0, v))
    }

    fn tangent_frame(&self, p: &Point) -> Result<Vec<TangentVector>, TargetError> {
        Ok(hyperbolic::tangent_frame(&p.0))
    }

    fn deck_apply(&self, g: &DeckElement, p: &Point) -> Result<Point, TargetError> {
        let m = self.matrix(g)?;
        let mut x = mat_vec(&m, &p.0);
        hyperbolic::reproject(&mut x);
        Ok(Point(x))
    }

    fn deck_apply_vector(&self, g: &DeckElement, v: &[f64]) -> Result<TangentVector, TargetError> {
        Ok(mat_vec(&self.matrix(g)?, v))
    }

    fn deck_compose(&self, g: &DeckElement, h: &DeckElement) -> Result<DeckElement, TargetError> {
        Ok(match (self.word(g)?, self.word(h)?) {
            (None, None) => DeckElement::Identity,
            (Some(w), None) | (None, Some(w)) => Self::wrap(w.clone()),
            (Some(a), Some(b)) => Self::wrap(a.compose(b)?),
        })
    }

    fn deck_inverse(&self, g: &DeckElement) -> Result<DeckElement, TargetError> {
        Ok(match self.word(g)? {
            None => DeckElement::Identity,
            Some(w) => Self::wrap(w.inverse()),
        })
    }

    /// Exact comparison of group elements; the tolerance is not needed.
    fn decks_equal(&self, g: &DeckElement, h: &DeckElement, _tol: f64) -> bool {
        match (self.word(g), self.word(h)) {
            (Ok(a), Ok(b)) => match (a, b) {
                (None, None) => true,
                (Some(w), None) | (None, Some(w)) => w.is_empty(),
                (Some(a), Some(b)) => a.same_element(b),
            },
            _ => false,
        }
    }

    fn parse_deck(&self, spec: &DeckSpec) -> Result<DeckElement, TargetError> {
        match spec {
            DeckSpec::Text(s) => Ok(Self::wrap(DeckWord::parse(s)?)),
            DeckSpec::Vector(v) if v.iter().all(|&c| c == 0) => Ok(DeckElement::Identity),
            DeckSpec::Vector(v) => Err(TargetError::BadDeck(format!(
                "expected a word in a, b, c, d, got {v:?}"
            ))),
        }
    }

    fn encode_deck(&self, g: &DeckElement) -> DeckSpec {
        match g {
            DeckElement::Word(w) if !w.is_empty() => DeckSpec::Text(w.as_str().to_string()),
            _ => DeckSpec::identity(),
        }
    }

    fn curvature_upper_bound(&self) -> f64 {
        -1.0
    }

    fn model_curvature(&self) -> Option<f64> {
        Some(-1.0)
    }

    fn spec(&self) -> TargetSpec {
        TargetSpec::Genus2Octagon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle_from_sides(a: f64, b: f64, c: f64) -> f64 {
        // angle opposite side a, hyperbolic law of cosines
        ((b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh())).clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn octagon_has_area_four_pi() {
        let g = Genus2Octagon::new().unwrap();
        let o = g.centre();
        let mut area = 0.0;
        for k in 0..8 {
            let (p, q) = (g.corner(k), g.corner(k + 1));
            let (a, b, c) = (g.distance(&p, &q), g.distance(&o, &q), g.distance(&o, &p));
            let alpha = angle_from_sides(a, b, c);
            let beta = angle_from_sides(b, a, c);
            let gamma = angle_from_sides(c, a, b);
            area += PI - alpha - beta - gamma;
        }
        assert!((area - 4.0 * PI).abs() < 1e-9, "area {area}");
    }

    #[test]
    fn corner_words_carry_base_corner() {
        let g = Genus2Octagon::new().unwrap();
        let c0 = g.corner(0);
        for k in 0..8 {
            let w = DeckElement::Word(g.corner_word(k));
            let image = g.deck_apply(&w, &c0).unwrap();
            assert!(g.distance(&image, &g.corner(k)) < 1e-9, "corner {k}");
        }
    }

    #[test]
    fn relator_and_free_reduction() {
        let gens = &group().as_ref().unwrap().gens;
        assert!(mat_close(&word_matrix_with(gens, BOUNDARY_WORD.as_bytes()), &IDENTITY, 1e-9));
        assert!(DeckWord::parse("aAbB").unwrap().is_empty());
        assert_eq!(DeckWord::parse("abBc").unwrap().as_str(), "ac");
        assert!(DeckWord::parse("ax").is_err());
        assert!(DeckWord::parse(&"a".repeat(MAX_WORD_LEN + 1)).is_err());
    }

    #[test]
    fn dehn_reduction_solves_the_word_problem() {
        assert!(DeckWord::parse(BOUNDARY_WORD).unwrap().is_empty());
        // every cyclic conjugate of the relator and its inverse
        for r in relator_rotations() {
            assert!(DeckWord::from_letters(r.iter().copied()).unwrap().is_empty());
        }
        // more than half of the relator shortens to the inverse of the rest
        assert_eq!(DeckWord::parse("abABc").unwrap().as_str(), "dcD");
        // exactly half: two different words, one element
        let x = DeckWord::parse("abAB").unwrap();
        let y = DeckWord::parse("dcDC").unwrap();
        assert_ne!(x.as_str(), y.as_str());
        assert_eq!(x, y);
        assert!(mat_close(x.matrix(), y.matrix(), 1e-9));
        // a relator buried inside a word
        let z = DeckWord::parse("aabABcdCDb").unwrap();
        assert_eq!(z.as_str(), "ab");
        assert_ne!(DeckWord::parse("ab").unwrap(), DeckWord::parse("ba").unwrap());
    }

    #[test]
    fn deck_group_acts_isometrically() {
        let g = Genus2Octagon::new().unwrap();
        let p = Point(hyperbolic::lift(&[0.3, -0.1]));
        let q = Point(hyperbolic::lift(&[-0.5, 0.4]));
        for s in ["a", "Bc", "dCa", "abABcd"] {
            let e = g.parse_deck(&DeckSpec::Text(s.into())).unwrap();
            let d0 = g.distance(&p, &q);
            let (gp, gq) = (g.deck_apply(&e, &p).unwrap(), g.deck_apply(&e, &q).unwrap());
            let d1 = g.distance(&gp, &gq);
            // coordinates of far lifts carry absolute error ~ eps * x0^2 in the chord
            let tol = 1e-12 * gp.0[0].max(gq.0[0]).powi(2);
            assert!((d0 - d1).abs() < tol, "{s}: {d0} vs {d1}");
            let inv = g.deck_inverse(&e).unwrap();
            assert!(g.deck_compose(&e, &inv).unwrap().is_identity());
            // a nontrivial deck element moves every point
            assert!(g.distance(&g.deck_apply(&e, &p).unwrap(), &p) > 0.1);
        }
    }
}

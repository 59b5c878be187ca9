//! Wavefront OBJ export of simplicial maps (`v` and `f` records only).

use std::fmt::Write as _;

use thiserror::Error;

use crate::complex::DeltaComplex;
use crate::smap::SimplicialMap;
use crate::targets::{Point, TargetKind};

#[derive(Debug, Error, PartialEq)]
pub enum ObjError {
    #[error("cannot place {0:?} targets in 3-space")]
    Unsupported(TargetKind),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Hyperboloid point to the Poincaré ball: `x / (1 + x₀)`.
pub fn poincare(p: &Point) -> Vec<f64> {
    let x0 = p.0[0];
    p.0[1..].iter().map(|x| x / (1.0 + x0)).collect()
}

fn position(kind: TargetKind, p: &Point) -> Result<[f64; 3], ObjError> {
    let coords = match kind {
        TargetKind::Euclidean | TargetKind::FlatTorus => p.0.clone(),
        TargetKind::Hyperbolic | TargetKind::Genus2Octagon => poincare(p),
        TargetKind::MetricTree => return Err(ObjError::Unsupported(kind)),
    };
    if coords.len() > 3 {
        return Err(ObjError::Unsupported(kind));
    }
    let mut out = [0.0; 3];
    out[..coords.len()].copy_from_slice(&coords);
    Ok(out)
}

/// One `v` record per vertex image and one triangular `f` record per
/// triangle; polygons are fanned from their preferred vertex. Flat and
/// hyperbolic coordinates are written directly and in the Poincaré model,
/// padded with zeros to three components.
pub fn to_obj(k: &DeltaComplex, f: &SimplicialMap) -> Result<String, ObjError> {
    let kind = f.target().kind();
    let mut out = String::new();
    for p in f.images() {
        let [x, y, z] = position(kind, p)?;
        writeln!(out, "v {x} {y} {z}").expect("writing to a string");
    }
    for face in 0..k.num_faces() {
        let verts = k.face_vertices(face);
        let start = k.preferred_corner(face);
        let n = verts.len();
        for j in 1..n - 1 {
            let idx = [start, (start + j) % n, (start + j + 1) % n].map(|i| verts[i] + 1);
            writeln!(out, "f {} {} {}", idx[0], idx[1], idx[2]).expect("writing to a string");
        }
    }
    Ok(out)
}

/// Vertex positions and faces (zero-based) of an OBJ document. Records other
/// than `v` and `f` are ignored; `f` entries may carry `/`-separated
/// texture and normal indices.
pub fn parse_obj(text: &str) -> Result<(Vec<[f64; 3]>, Vec<Vec<usize>>), ObjError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ObjError::Parse { line, message };
        let mut parts = raw.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(|s| s.parse::<f64>().map_err(|e| err(e.to_string())))
                    .collect::<Result<_, _>>()?;
                if c.len() < 3 {
                    return Err(err("vertex with fewer than 3 coordinates".into()));
                }
                vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or_default();
                        match head.parse::<usize>() {
                            Ok(j) if j >= 1 && j <= vertices.len() => Ok(j - 1),
                            _ => Err(err(format!("bad vertex reference {s:?}"))),
                        }
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(err("face with fewer than 3 vertices".into()));
                }
                faces.push(idx);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

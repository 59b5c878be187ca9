//! Seeded random instances for test suites and the command line.
//!
//! Every generator draws from a caller-supplied [`ChaCha8Rng`], so a seed
//! fixes the whole instance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::complex::{annulus_quad_complex, DeltaComplex};
use crate::fixtures::{genus2_fan, genus2_subdivided, grid_complex, torus_complex, Instance};
use crate::metric::{induced_quasimetric, scale_metric, SimplicialMetric};
use crate::smap::SimplicialMap;
use crate::targets::{hyperbolic, make_target, DeckElement, Point, SharedTarget, TargetKind, TargetSpec};

/// Lengths drawn uniformly from `[1, 2)`. Any such assignment satisfies every
/// triangle and polygon inequality, since no side exceeds the sum of two
/// others.
pub fn random_metric(rng: &mut ChaCha8Rng, num_edges: usize) -> SimplicialMetric {
    SimplicialMetric::new((0..num_edges).map(|_| rng.gen_range(1.0..2.0)).collect()).expect("positive lengths")
}

/// A random point of `t`: coordinates in `[-spread, spread)` for flat
/// models, hyperbolic points within distance about `spread` of the origin,
/// and points anywhere on a metric tree.
pub fn random_point(t: &SharedTarget, rng: &mut ChaCha8Rng, spread: f64) -> Point {
    match t.kind() {
        TargetKind::Euclidean | TargetKind::FlatTorus => {
            Point((0..t.dim()).map(|_| rng.gen_range(-spread..spread)).collect())
        }
        TargetKind::Hyperbolic | TargetKind::Genus2Octagon => {
            let s: Vec<f64> = (0..t.dim()).map(|_| rng.gen_range(-spread..spread)).collect();
            Point(hyperbolic::lift(&s))
        }
        TargetKind::MetricTree => {
            let TargetSpec::MetricTree { lengths, .. } = t.spec() else {
                unreachable!("kind and spec agree")
            };
            let e = rng.gen_range(0..lengths.len());
            Point(vec![e as f64, rng.gen_range(0.0..=lengths[e])])
        }
    }
}

/// A random tree with `n` vertices, each attached to a random earlier one,
/// and edge lengths in `[0.5, 2)`.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> SharedTarget {
    let edges: Vec<[usize; 2]> = (1..n).map(|v| [rng.gen_range(0..v), v]).collect();
    let lengths = edges.iter().map(|_| rng.gen_range(0.5..2.0)).collect();
    make_target(&TargetSpec::MetricTree {
        num_vertices: n,
        edges,
        lengths,
    })
    .expect("valid tree")
}

fn target(spec: TargetSpec) -> SharedTarget {
    make_target(&spec).expect("valid target")
}

/// The wheel of `n` triangles around vertex 0.
pub fn wheel_complex(n: usize) -> DeltaComplex {
    let mut edges: Vec<[usize; 2]> = (1..=n).map(|i| [0, i]).collect();
    edges.extend((1..=n).map(|i| [i, i % n + 1]));
    let faces: Vec<Vec<(usize, i8)>> = (0..n).map(|i| vec![(i, 1), (n + i, 1), ((i + 1) % n, -1)]).collect();
    DeltaComplex::from_lists(&edges, &faces).expect("wheel is a disk")
}

fn simply_connected(rng: &mut ChaCha8Rng) -> DeltaComplex {
    match rng.gen_range(0..4) {
        0 => grid_complex(rng.gen_range(1..=3)),
        1 => wheel_complex(rng.gen_range(3..=7)),
        2 => annulus_quad_complex(rng.gen_range(3..=6)).expect("n >= 3"),
        _ => wheel_complex(3),
    }
}

fn random_map(k: &DeltaComplex, t: SharedTarget, rng: &mut ChaCha8Rng, spread: f64) -> SimplicialMap {
    let images = (0..k.num_vertices()).map(|_| random_point(&t, rng, spread)).collect();
    SimplicialMap::with_identity_decks(k, t, images).expect("valid images")
}

/// One instance of the mixed suite, labelled by its target.
#[derive(Clone, Debug)]
pub struct SuiteInstance {
    pub label: &'static str,
    pub instance: Instance,
    /// The metric is a constant multiple of the map's induced quasi-metric.
    pub conformal: bool,
}

/// A random `(complex, metric, map)` triple; `slot` picks the target
/// family so that consecutive slots cycle through all of them. Every fourth
/// instance gets a conformal metric `c · L(f)`.
pub fn suite_instance(rng: &mut ChaCha8Rng, slot: usize) -> SuiteInstance {
    let (label, k, map) = match slot % 7 {
        0 => {
            let k = simply_connected(rng);
            let m = random_map(&k, target(TargetSpec::Euclidean { dim: 2 }), rng, 2.0);
            ("euclidean2", k, m)
        }
        1 => {
            let k = simply_connected(rng);
            let m = random_map(&k, target(TargetSpec::Euclidean { dim: 3 }), rng, 2.0);
            ("euclidean3", k, m)
        }
        2 => {
            let k = simply_connected(rng);
            let m = random_map(&k, target(TargetSpec::Hyperbolic { dim: 2 }), rng, 1.0);
            ("hyperbolic2", k, m)
        }
        3 => {
            let k = torus_complex();
            let t = target(TargetSpec::FlatTorus { dim: 2 });
            let a: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..=2)).collect();
            let b: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..=2)).collect();
            let c = vec![a[0] + b[0], a[1] + b[1]];
            let decks = [a, b, c].into_iter().map(DeckElement::Translation).collect();
            let m = SimplicialMap::new(&k, t.clone(), vec![random_point(&t, rng, 1.0)], decks)
                .expect("cocycle holds");
            ("flat_torus", k, m)
        }
        4 => {
            let inst = if rng.gen_bool(0.5) { genus2_fan() } else { genus2_subdivided(1) };
            let t = inst.map.target().clone();
            let images = inst
                .map
                .images()
                .iter()
                .map(|p| {
                    let frame = t.tangent_frame(p).expect("manifold");
                    let mut v = vec![0.0; p.0.len()];
                    for b in &frame {
                        let c: f64 = rng.gen_range(-0.3..0.3);
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi += c * bi;
                        }
                    }
                    t.exp(p, &v).expect("manifold")
                })
                .collect();
            let m = inst.map.with_images(images).expect("valid images");
            ("genus2", inst.complex, m)
        }
        5 => {
            let k = simply_connected(rng);
            let size = rng.gen_range(2..=5);
            let m = random_map(&k, random_tree(rng, size), rng, 1.0);
            ("metric_tree", k, m)
        }
        _ => {
            let k = grid_complex(rng.gen_range(1..=3));
            let m = random_map(&k, target(TargetSpec::Euclidean { dim: 1 }), rng, 3.0);
            ("euclidean1", k, m)
        }
    };
    let conformal = slot % 4 == 3;
    let metric = if conformal {
        let induced = induced_quasimetric(&k, &map).expect("geodesic images are metric");
        scale_metric(&induced, rng.gen_range(0.5..3.0)).expect("positive scale")
    } else {
        random_metric(rng, k.num_edges())
    };
    SuiteInstance {
        label,
        instance: Instance {
            complex: k,
            metric,
            map,
            fixed: vec![],
        },
        conformal,
    }
}

/// Random map of a random quad annulus into the hyperbolic plane, with a
/// random metric.
pub fn hyperbolic_quad_instance(rng: &mut ChaCha8Rng) -> Instance {
    let k = annulus_quad_complex(rng.gen_range(3..=8)).expect("n >= 3");
    let spread = rng.gen_range(0.2..2.0);
    let map = random_map(&k, target(TargetSpec::Hyperbolic { dim: 2 }), rng, spread);
    Instance {
        metric: random_metric(rng, k.num_edges()),
        complex: k,
        map,
        fixed: vec![],
    }
}

/// Random map of a small triangulated disk into `spec` with a random
/// metric; used for gradient checks.
pub fn gradient_instance(rng: &mut ChaCha8Rng, spec: TargetSpec) -> Instance {
    let k = match rng.gen_range(0..3) {
        0 => grid_complex(rng.gen_range(1..=3)),
        1 => wheel_complex(rng.gen_range(3..=7)),
        _ => annulus_quad_complex(rng.gen_range(3..=5)).expect("n >= 3"),
    };
    let map = random_map(&k, target(spec), rng, 1.0);
    Instance {
        metric: random_metric(rng, k.num_edges()),
        complex: k,
        map,
        fixed: vec![],
    }
}

/// Real-valued Dirichlet instance on a grid: random boundary values in
/// `[-1, 1]`, random interior starting values, random metric.
pub fn real_dirichlet_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(2..=5);
    let k = grid_complex(n);
    let fixed: Vec<usize> = k.boundary_vertices().into_iter().collect();
    let map = random_map(&k, target(TargetSpec::Euclidean { dim: 1 }), rng, 1.0);
    Instance {
        metric: random_metric(rng, k.num_edges()),
        complex: k,
        map,
        fixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;
    use rand::SeedableRng;

    #[test]
    fn suite_instances_are_valid_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for slot in 0..56 {
            let x = suite_instance(&mut a, slot);
            let y = suite_instance(&mut b, slot);
            assert_eq!(x.instance.map.images(), y.instance.map.images());
            assert_eq!(x.instance.metric, y.instance.metric);
            let k = &x.instance.complex;
            let report = validate_metric(k, &x.instance.metric).unwrap();
            // induced metrics of degenerate image triangles may miss by rounding
            let slack = if x.conformal { 1e-12 } else { 0.0 };
            assert!(report.violations.iter().all(|v| v.excess <= slack), "{}", x.label);
            assert!(x.instance.map.check_cocycle(k).is_ok());
        }
    }

    #[test]
    fn wheel_is_a_disk() {
        let k = wheel_complex(5);
        assert_eq!(k.euler_characteristic(), 1);
        assert_eq!(k.boundary_vertices().len(), 5);
    }
}

//! Property tests over seeded random instances.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simplicial_energy::complex::{
    annulus_quad_complex, collapse_zero_subcomplex, conformal_subdivide_quad, conformal_subdivide_triangle,
    DeltaComplex,
};
use simplicial_energy::fixtures::{genus2_fan, grid_complex, torus_complex, torus_identity};
use simplicial_energy::metric::{
    edge_weights, euclidean_area, induced_quasimetric, scale_metric, simplicial_area, validate_metric,
    SimplicialMetric,
};
use simplicial_energy::random::{
    gradient_instance, hyperbolic_quad_instance, random_metric, random_point, random_tree, suite_instance,
    wheel_complex,
};
use simplicial_energy::smap::{riemannian_area, SimplicialMap};
use simplicial_energy::solver::{
    energy_gradient, finite_diff_gradient, flow_step, flow_to_harmonic, FlowConfig, StepStatus,
};
use simplicial_energy::targets::{make_target, DeckElement, DeckSpec, Point, SharedTarget, TargetSpec};
use simplicial_energy::verify::{check_convex_hull, check_e_ge_a, check_mean_value};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn triangulation(r: &mut ChaCha8Rng) -> DeltaComplex {
    match r.gen_range(0..3) {
        0 => grid_complex(r.gen_range(1..=4)),
        1 => wheel_complex(r.gen_range(3..=8)),
        _ => torus_complex(),
    }
}

fn single_triangle() -> DeltaComplex {
    DeltaComplex::from_lists(&[[0, 1], [1, 2], [0, 2]], &[vec![(0, 1), (1, 1), (2, -1)]]).unwrap()
}

fn single_quad() -> DeltaComplex {
    DeltaComplex::from_lists(
        &[[0, 1], [1, 2], [2, 3], [3, 0]],
        &[vec![(0, 1), (1, 1), (2, 1), (3, 1)]],
    )
    .unwrap()
}

fn targets() -> Vec<SharedTarget> {
    [
        TargetSpec::Euclidean { dim: 3 },
        TargetSpec::Hyperbolic { dim: 2 },
        TargetSpec::Hyperbolic { dim: 3 },
        TargetSpec::FlatTorus { dim: 2 },
        TargetSpec::Genus2Octagon,
    ]
    .iter()
    .map(|s| make_target(s).unwrap())
    .collect()
}

fn random_word(r: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| b"abcdABCD"[r.gen_range(0..8)] as char).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complex_json_round_trip(seed in any::<u64>(), slot in 0usize..7) {
        let s = suite_instance(&mut rng(seed), slot);
        let k = &s.instance.complex;
        let back: DeltaComplex = serde_json::from_str(&serde_json::to_string(k).unwrap()).unwrap();
        prop_assert_eq!(&back, k);
        let l = &s.instance.metric;
        let back: SimplicialMetric = serde_json::from_str(&serde_json::to_string(l).unwrap()).unwrap();
        prop_assert_eq!(&back, l);
    }

    #[test]
    fn triangle_subdivision_preserves_area_and_validity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = triangulation(&mut r);
        let l = random_metric(&mut r, k.num_edges());
        let (k2, l2) = conformal_subdivide_triangle(&k, &l).unwrap();
        prop_assert!(rel(simplicial_area(&k, &l), simplicial_area(&k2, &l2)) <= 1e-12);
        prop_assert!(validate_metric(&k2, &l2).unwrap().is_valid());
    }

    #[test]
    fn quad_subdivision_preserves_area_and_validity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = annulus_quad_complex(r.gen_range(3..=8)).unwrap();
        let l = random_metric(&mut r, k.num_edges());
        let (k2, l2) = conformal_subdivide_quad(&k, &l).unwrap();
        prop_assert!(rel(simplicial_area(&k, &l), simplicial_area(&k2, &l2)) <= 1e-12);
        prop_assert!(validate_metric(&k2, &l2).unwrap().is_valid());
    }

    #[test]
    fn quad_area_factorizes(a in 1.0f64..2.0, b in 1.0f64..2.0, c in 1.0f64..2.0, d in 1.0f64..2.0) {
        let l = SimplicialMetric::new(vec![a, b, c, d]).unwrap();
        let area = simplicial_area(&single_quad(), &l);
        prop_assert!(rel(area, (a + c) * (b + d)) <= 1e-15);
    }

    #[test]
    fn simplicial_area_dominates_six_heron(a in 0.01f64..10.0, b in 0.01f64..10.0, t in 0.0f64..1.0) {
        // c ranges over the admissible interval [|a-b|, a+b]
        let c = (a - b).abs() + t * (a + b - (a - b).abs());
        let k = single_triangle();
        let l = SimplicialMetric::new(vec![a, b, c]).unwrap();
        let heron = euclidean_area(&k, &l).unwrap();
        prop_assert!(simplicial_area(&k, &l) >= 6.0 * heron * (1.0 - 1e-12));
    }

    #[test]
    fn weights_positive_and_area_scales_quadratically(seed in any::<u64>(), lambda in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let k = triangulation(&mut r);
        let l = random_metric(&mut r, k.num_edges());
        for w in edge_weights(&k, &l).unwrap() {
            prop_assert!(w.unwrap() > 0.0);
        }
        let scaled = scale_metric(&l, lambda).unwrap();
        let expect = lambda * lambda * simplicial_area(&k, &l);
        prop_assert!(rel(simplicial_area(&k, &scaled), expect) <= 1e-12);
    }

    #[test]
    fn target_distance_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut all = targets();
        all.push(random_tree(&mut r, 6));
        for t in &all {
            let p = random_point(t, &mut r, 1.5);
            let q = random_point(t, &mut r, 1.5);
            let s = random_point(t, &mut r, 1.5);
            let (pq, qs, ps) = (t.distance(&p, &q), t.distance(&q, &s), t.distance(&p, &s));
            prop_assert!((pq - t.distance(&q, &p)).abs() <= 1e-12);
            prop_assert!(t.distance(&p, &p) <= 1e-12);
            prop_assert!(ps <= pq + qs + 1e-12);
        }
    }

    #[test]
    fn manifold_exp_log_and_geodesics(seed in any::<u64>(), s in 0.0f64..1.0) {
        let mut r = rng(seed);
        for t in targets() {
            let p = random_point(&t, &mut r, 1.5);
            let q = random_point(&t, &mut r, 1.5);
            let v = t.log(&p, &q).unwrap();
            let d = t.distance(&p, &q);
            prop_assert!((t.tangent_norm(&p, &v) - d).abs() <= 1e-9 * (1.0 + d));
            let back = t.exp(&p, &v).unwrap();
            prop_assert!(t.distance(&back, &q) <= 1e-9);
            let m = t.geodesic_eval(&p, &q, s);
            prop_assert!((t.distance(&p, &m) - s * d).abs() <= 1e-9 * (1.0 + d));
        }
    }

    #[test]
    fn genus2_decks_are_isometries(seed in any::<u64>(), len in 0usize..12) {
        let t = make_target(&TargetSpec::Genus2Octagon).unwrap();
        let mut r = rng(seed);
        let g = t.parse_deck(&DeckSpec::Text(random_word(&mut r, len))).unwrap();
        let p = random_point(&t, &mut r, 1.0);
        let q = random_point(&t, &mut r, 1.0);
        let (gp, gq) = (t.deck_apply(&g, &p).unwrap(), t.deck_apply(&g, &q).unwrap());
        let d = t.distance(&p, &q);
        prop_assert!((t.distance(&gp, &gq) - d).abs() <= 1e-10 * gp.0[0].max(1.0) * gq.0[0].max(1.0));
        let relator = t.parse_deck(&DeckSpec::Text("abABcdCD".into())).unwrap();
        prop_assert!(t.decks_equal(&relator, &DeckElement::Identity, 1e-9));
    }

    #[test]
    fn energy_dominates_area_and_forms_agree(seed in any::<u64>(), slot in 0usize..28) {
        let s = suite_instance(&mut rng(seed), slot);
        let (k, l, f) = (&s.instance.complex, &s.instance.metric, &s.instance.map);
        let forms = f.energy_forms(k, l).unwrap();
        let e = forms.corner_sum.value();
        prop_assert!(e >= f.simplicial_area(k) - 1e-9);
        prop_assert!(forms.relative_gap() <= 1e-12);
        let check = check_e_ge_a(k, f, l, 1e-9).unwrap();
        prop_assert!(check.pass, "{:?}", check);
        if s.conformal {
            prop_assert!((e - f.simplicial_area(k)).abs() <= 1e-9 * (1.0 + e));
        }
    }

    #[test]
    fn energy_is_scale_invariant_and_area_ignores_metric(seed in any::<u64>(), slot in 0usize..28, lambda in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let s = suite_instance(&mut r, slot);
        let (k, l, f) = (&s.instance.complex, &s.instance.metric, &s.instance.map);
        let e = f.energy(k, l).unwrap().value();
        let scaled = f.energy(k, &scale_metric(l, lambda).unwrap()).unwrap().value();
        prop_assert!(rel(e, scaled) <= 1e-10);
        let before = f.simplicial_area(k);
        let _ = random_metric(&mut r, k.num_edges());
        prop_assert_eq!(before.to_bits(), f.simplicial_area(k).to_bits());
    }

    #[test]
    fn quad_maps_satisfy_half_energy_area_bound(seed in any::<u64>()) {
        let inst = hyperbolic_quad_instance(&mut rng(seed));
        let (k, l, f) = (&inst.complex, &inst.metric, &inst.map);
        let area = riemannian_area(f, k).unwrap();
        prop_assert!(area <= f.energy(k, l).unwrap().value() / 2.0 + 1e-9);
    }

    #[test]
    fn gauge_transforms_preserve_energy_and_areas(seed in any::<u64>(), len in 1usize..4) {
        let mut r = rng(seed);
        let inst = if r.gen_bool(0.5) { genus2_fan() } else { torus_identity() };
        let (k, f) = (&inst.complex, &inst.map);
        let l = random_metric(&mut r, k.num_edges());
        let t = f.target();
        let h = match t.spec() {
            TargetSpec::FlatTorus { .. } => DeckElement::Translation(vec![r.gen_range(-3..=3), r.gen_range(-3..=3)]),
            _ => t.parse_deck(&DeckSpec::Text(random_word(&mut r, len))).unwrap(),
        };
        let g = f.gauge_transform(k, 0, &h).unwrap();
        // hyperboloid lifts of size C carry rounding of order ε·C² into lengths
        let size = (0..k.num_edges())
            .map(|e| g.head_lift(k, e).0[0].abs().max(g.image(k.edge(e)[0]).0[0].abs()))
            .fold(1.0, f64::max);
        let tol = match t.spec() {
            TargetSpec::FlatTorus { .. } => 1e-12,
            _ => 1e-12 * size * size,
        };
        prop_assert!(rel(f.energy(k, &l).unwrap().value(), g.energy(k, &l).unwrap().value()) <= tol);
        prop_assert!(rel(f.simplicial_area(k), g.simplicial_area(k)) <= tol);
        prop_assert!(rel(riemannian_area(f, k).unwrap(), riemannian_area(&g, k).unwrap()) <= tol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), hyperbolic in any::<bool>()) {
        let spec = if hyperbolic { TargetSpec::Hyperbolic { dim: 2 } } else { TargetSpec::Euclidean { dim: 2 } };
        let inst = gradient_instance(&mut rng(seed), spec);
        let (k, l, f) = (&inst.complex, &inst.metric, &inst.map);
        let t = f.target();
        let g = energy_gradient(k, f, l).unwrap();
        let fd = finite_diff_gradient(k, f, l, 1e-5).unwrap();
        let scale = g.iter().zip(f.images()).map(|(v, p)| t.tangent_norm(p, v)).fold(0.0, f64::max);
        for ((a, b), p) in g.iter().zip(&fd).zip(f.images()) {
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            prop_assert!(t.tangent_norm(p, &diff) <= 1e-6 * scale.max(1.0));
        }
    }

    #[test]
    fn flows_are_monotone_and_keep_decks(seed in any::<u64>(), slot in 0usize..4) {
        let mut r = rng(seed);
        let (k, f) = match slot {
            0 => {
                let inst = torus_identity();
                let t = inst.map.target().clone();
                let p = random_point(&t, &mut r, 1.0);
                (inst.complex.clone(), inst.map.with_images(vec![p]).unwrap())
            }
            1 => {
                let inst = genus2_fan();
                let t = inst.map.target().clone();
                let p = random_point(&t, &mut r, 0.3);
                (inst.complex.clone(), inst.map.with_images(vec![p]).unwrap())
            }
            _ => {
                let inst = gradient_instance(&mut r, TargetSpec::Hyperbolic { dim: 2 });
                (inst.complex, inst.map)
            }
        };
        let l = random_metric(&mut r, k.num_edges());
        let cfg = FlowConfig { grad_tol: 1e-7, max_iters: 2000, ..FlowConfig::default() };
        let (g, report) = flow_to_harmonic(&k, &f, &l, &cfg).unwrap();
        prop_assert!(report.is_monotone());
        prop_assert_eq!(g.decks(), f.decks());
        prop_assert!(g.energy(&k, &l).unwrap().value() <= f.energy(&k, &l).unwrap().value());
    }

    #[test]
    fn zero_energy_maps_are_fixed_points(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = triangulation(&mut r);
        let t = make_target(&TargetSpec::Hyperbolic { dim: 2 }).unwrap();
        let p = random_point(&t, &mut r, 1.0);
        let decks = vec![DeckElement::Identity; k.num_edges()];
        let f = match SimplicialMap::new(&k, t, vec![p; k.num_vertices()], decks) {
            Ok(f) => f,
            // the torus needs translations, which hyperbolic targets lack
            Err(_) => return Ok(()),
        };
        let l = random_metric(&mut r, k.num_edges());
        let (g, step) = flow_step(&k, &f, &l, &FlowConfig::default()).unwrap();
        prop_assert_eq!(step.status, StepStatus::Critical);
        prop_assert_eq!(g.images(), f.images());
    }

    #[test]
    fn dirichlet_maps_are_centroidal_and_in_the_hull(seed in any::<u64>()) {
        let inst = simplicial_energy::random::real_dirichlet_instance(&mut rng(seed));
        let (k, l) = (&inst.complex, &inst.metric);
        let cfg = FlowConfig { grad_tol: 1e-9, fixed_vertices: inst.fixed.clone(), ..FlowConfig::default() };
        let (g, report) = flow_to_harmonic(k, &inst.map, l, &cfg).unwrap();
        prop_assert!(report.converged());
        let mv = check_mean_value(k, &g, l, &inst.fixed, 1e-8).unwrap();
        prop_assert!(mv.pass, "{:?}", mv);
        let hull = check_convex_hull(k, &g, &inst.fixed, 1e-8).unwrap();
        prop_assert!(hull.pass, "{:?}", hull);
        let again = check_convex_hull(k, &g, &inst.fixed, 1e-8).unwrap();
        prop_assert_eq!(hull, again);
    }

    #[test]
    fn collapse_preserves_euler_characteristic(seed in any::<u64>(), n in 3usize..9) {
        let mut r = rng(seed);
        let k = wheel_complex(n);
        let t = make_target(&TargetSpec::Euclidean { dim: 2 }).unwrap();
        // hub and first rim vertex share an image, so spoke 0 has zero length
        let mut images = vec![Point(vec![0.0, 0.0]); 2];
        for _ in 1..n {
            images.push(random_point(&t, &mut r, 2.0));
        }
        let f = SimplicialMap::with_identity_decks(&k, t, images).unwrap();
        let l = induced_quasimetric(&k, &f).unwrap();
        prop_assume!((1..k.num_edges()).all(|e| l.get(e) > 0.0));
        let out = collapse_zero_subcomplex(&k, &l, &f).unwrap();
        prop_assert_eq!(out.stats.euler_before, out.stats.euler_after);
        prop_assert_eq!(out.complex.euler_characteristic(), k.euler_characteristic());
        let before = f.energy(&k, &l).unwrap().value();
        let after = out.map.energy(&out.complex, &out.metric).unwrap().value();
        prop_assert!((before - after - out.stats.two_gon_energy).abs() <= 1e-12 * before.max(1.0));
    }
}

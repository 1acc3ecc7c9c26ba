mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

use torusrep::cert::{eval_word, search_certificate, sl2_elements, verify_certificate, SearchOptions};
use torusrep::knot_reps::solver::canonicalize_gauge;
use torusrep::knot_reps::{KnotSpec, Presentation, Su2};
use torusrep::pillowcase::{
    has_essential_cycle, project, separates, CylinderCurve, EdgeLabel, EmbeddedGraph, PillowcasePoint,
};
use torusrep::torus_dynamics::{ShearingMap, ShearingProfile, ShearingProgram, TorusPoint};

fn seeded_program(seed: u64, odd: bool) -> ShearingProgram {
    random_program(&mut ChaCha8Rng::seed_from_u64(seed), 0.4, odd)
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (0.0..TAU, 0.0..TAU).prop_map(|(x, y)| [x, y])
}

fn unit_quaternion() -> impl Strategy<Value = Su2> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |q| q.0 * q.0 + q.1 * q.1 + q.2 * q.2 + q.3 * q.3 > 1e-3)
        .prop_map(|q| Su2::new(q.0, q.1, q.2, q.3).normalized())
}

fn word(generators: i32, max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec((1..=generators, any::<bool>()).prop_map(|(g, s)| if s { g } else { -g }), 0..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn programs_preserve_area_and_invert(seed in any::<u64>(), t in 0.0..=1.0f64, p in point()) {
        let prog = seeded_program(seed, false);
        let det = fd_det(|q| prog.eval_lift(t, q), p, 1e-5);
        prop_assert!((det - 1.0).abs() <= 1e-6);
        let back = prog.eval_inverse_lift(t, prog.eval_lift(t, p));
        prop_assert!((back[0] - p[0]).abs() <= 1e-12 && (back[1] - p[1]).abs() <= 1e-12);
    }

    #[test]
    fn odd_programs_are_equivariant(seed in any::<u64>(), t in 0.0..=1.0f64, p in point()) {
        let prog = seeded_program(seed, true);
        prop_assert!(prog.is_equivariant());
        let a = prog.eval_lift(t, p);
        let b = prog.eval_lift(t, [-p[0], -p[1]]);
        prop_assert_eq!([-a[0], -a[1]], b);
    }

    #[test]
    fn single_shear_matches_closed_form(
        n in 0..NORMALS.len(),
        c in -1.0..1.0f64,
        d in -1.0..1.0f64,
        p in point(),
    ) {
        let w = NORMALS[n];
        let mut profile = ShearingProfile::sine(1, c);
        profile.cosine.push((2, d));
        let m = ShearingMap::along_normal(w, profile).unwrap();
        let s = w[0] as f64 * p[0] + w[1] as f64 * p[1];
        let f = c * s.sin() + d * (2.0 * s).cos();
        let q = m.apply_lift(p);
        prop_assert!((q[0] - (p[0] - w[1] as f64 * f)).abs() <= 1e-12);
        prop_assert!((q[1] - (p[1] + w[0] as f64 * f)).abs() <= 1e-12);
    }

    #[test]
    fn projection_is_tau_invariant(p in point()) {
        let a = project(TorusPoint::from_array(p));
        let b = project(TorusPoint::from_array([-p[0], -p[1]]));
        prop_assert!((a.alpha - b.alpha).abs() <= 1e-12);
        prop_assert!(wrap_pi(a.beta - b.beta).abs() <= 1e-12);
    }

    #[test]
    fn winding_is_invariant_under_rotation_and_refinement(
        turns in -3i64..=3,
        n in 30usize..80,
        shift in 0usize..80,
        wobble in 0.0..0.4f64,
    ) {
        let verts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let s = i as f64 / n as f64;
                [1.5 + wobble * (TAU * s).sin(), (turns as f64 * TAU * s + 0.3 * (2.0 * TAU * s).sin()).rem_euclid(TAU)]
            })
            .collect();
        let base = CylinderCurve::closed(verts.clone()).winding_number().unwrap();
        prop_assert_eq!(base, turns);
        let mut rotated = verts.clone();
        rotated.rotate_left(shift % n);
        prop_assert_eq!(CylinderCurve::closed(rotated).winding_number().unwrap(), base);
        let mut refined = Vec::with_capacity(2 * n);
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            refined.push(a);
            refined.push([(a[0] + b[0]) / 2.0, (a[1] + wrap_pi(b[1] - a[1]) / 2.0).rem_euclid(TAU)]);
        }
        prop_assert_eq!(CylinderCurve::closed(refined).winding_number().unwrap(), base);
    }

    #[test]
    fn gauge_fixing_is_idempotent(a in unit_quaternion(), b in unit_quaternion(), c in unit_quaternion()) {
        let once = canonicalize_gauge(&[a, b, c], 1);
        let twice = canonicalize_gauge(&once, 1);
        for (x, y) in once.iter().zip(&twice) {
            prop_assert!(qdist(x.to_array(), y.to_array()) <= 1e-14);
        }
        prop_assert!(once[1].y == 0.0 && once[1].z >= 0.0);
        // conjugation preserves relator values up to conjugacy
        let tr = |q: &[Su2]| qword(&q.iter().map(|g| g.to_array()).collect::<Vec<_>>(), &[1, 2, -3, 2])[0];
        prop_assert!((tr(&[a, b, c]) - tr(&once)).abs() <= 1e-12);
    }

    #[test]
    fn word_evaluation_is_a_homomorphism(
        seed in any::<u64>(),
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
        w1 in word(3, 20),
        w2 in word(3, 20),
    ) {
        let els = sl2_elements(p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let imgs: Vec<_> = (0..3).map(|_| els[rng.gen_range(0..els.len())]).collect();
        let mut w = w1.clone();
        w.extend(&w2);
        let lhs = eval_word(&imgs, &w).unwrap();
        let rhs = eval_word(&imgs, &w1).unwrap().mul(&eval_word(&imgs, &w2).unwrap());
        prop_assert_eq!(lhs, rhs);
        let raw: Vec<[u64; 4]> = imgs.iter().map(|m| m.entries()).collect();
        let oracle = w.iter().fold([1, 0, 0, 1], |acc, &a| {
            let g = raw[a.unsigned_abs() as usize - 1];
            let g = if a > 0 { g } else { [g[3], (p - g[1]) % p, (p - g[2]) % p, g[0]] };
            mat_mul_mod(acc, g, p)
        });
        prop_assert_eq!(lhs.entries(), oracle);
    }

    #[test]
    fn program_json_round_trip(seed in any::<u64>()) {
        let prog = seeded_program(seed, false);
        let back: ShearingProgram = serde_json::from_str(&serde_json::to_string(&prog).unwrap()).unwrap();
        prop_assert_eq!(&back, &prog);
    }

    #[test]
    fn presentation_json_round_trip(rels in prop::collection::vec(word(3, 12), 0..4)) {
        let pres = Presentation::new("random", 3, rels);
        let back: Presentation = serde_json::from_str(&serde_json::to_string(&pres).unwrap()).unwrap();
        prop_assert_eq!(back, pres);
    }

    #[test]
    fn knot_spec_json_round_trip(p in 2i64..9, q in 2i64..9) {
        let spec = KnotSpec::torus(p, q);
        let back: KnotSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        prop_assert_eq!(back, spec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn found_certificates_verify(rels in prop::collection::vec(word(2, 8), 1..3)) {
        let pres = Presentation::new("random", 2, rels);
        let r = search_certificate(&pres, &[2, 3, 5], &SearchOptions::default()).unwrap();
        if let Some(c) = r.certificate {
            prop_assert!(verify_certificate(&pres, &c).verdict.is_accept());
        }
    }

    #[test]
    fn separation_is_monotone_and_implies_essential_cycle(
        segs in prop::collection::vec((0.3..2.8f64, 0.0..TAU, 0.3..2.8f64, 0.0..TAU), 1..8),
        circle in prop::option::of(0.5..2.6f64),
    ) {
        let mut g = EmbeddedGraph::new();
        if let Some(a) = circle {
            g.push(CylinderCurve::vertical_circle(a, 0.05), EdgeLabel::Other);
        }
        let mut before = separates(&g, PillowcasePoint::P, PillowcasePoint::Q, 128).unwrap_or(false);
        for (a0, b0, a1, b1) in segs {
            g.push(CylinderCurve::segment([a0, b0], [a1, b1], 0.05), EdgeLabel::Other);
            let now = separates(&g, PillowcasePoint::P, PillowcasePoint::Q, 128).unwrap();
            prop_assert!(!before || now);
            if now {
                prop_assert!(has_essential_cycle(&g, 128));
            }
            before = now;
        }
    }
}

#[test]
fn monte_carlo_area_of_a_box_is_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let lo = [1.0, 2.0];
    let side = PI;
    let expected = side * side / (TAU * TAU);
    for seed in 0..3 {
        let prog = seeded_program(seed, false);
        let samples = 100_000;
        let mut hits = 0usize;
        for _ in 0..samples {
            let p = random_point(&mut rng);
            let q = prog.eval(0.7, TorusPoint::from_array(p)).to_array();
            let inside = |v: f64, l: f64| (v - l).rem_euclid(TAU) < side;
            if inside(q[0], lo[0]) && inside(q[1], lo[1]) {
                hits += 1;
            }
        }
        let frac = hits as f64 / samples as f64;
        assert!((frac / expected - 1.0).abs() <= 0.02, "{frac} vs {expected}");
    }
}

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use torusrep::pillowcase::{
    graph_csv, graph_svg, has_essential_cycle, project, separates, separates_converged, singular_points,
    CylinderCurve, EdgeLabel, EmbeddedGraph, PillowcaseError, PillowcasePoint, SvgOptions,
};
use torusrep::torus_dynamics::TorusPoint;

fn circle(alpha: f64) -> EmbeddedGraph {
    EmbeddedGraph::new().with(CylinderCurve::vertical_circle(alpha, 0.05), EdgeLabel::Other)
}

#[test]
fn projection_examples() {
    let p = project(TorusPoint::new(FRAC_PI_2, PI));
    assert_eq!((p.alpha, p.beta), (FRAC_PI_2, PI));
    let q = project(TorusPoint::new(3.0 * FRAC_PI_2, PI));
    assert!((q.alpha - FRAC_PI_2).abs() < 1e-15 && (q.beta - PI).abs() < 1e-15);
    for s in singular_points() {
        assert_eq!(project(s.lift()), s);
        assert!(s.is_singular());
    }
}

#[test]
fn projection_is_two_to_one_off_the_corners() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..1000 {
        let p = random_point(&mut rng);
        let a = project(TorusPoint::from_array(p));
        let b = project(TorusPoint::from_array([-p[0], -p[1]]));
        assert!((a.alpha - b.alpha).abs() < 1e-12 && wrap_pi(a.beta - b.beta).abs() < 1e-12);
        // the two preimages are distinct unless p is a corner
        assert!(torus_dist(p, [-p[0], -p[1]]) > 1e-9);
        assert!((0.0..=PI).contains(&a.alpha) && (0.0..TAU).contains(&a.beta));
        assert_eq!(project(a.lift()), a);
    }
}

#[test]
fn winding_examples() {
    let small = CylinderCurve::closed((0..12).map(|i| {
        let s = TAU * i as f64 / 12.0;
        [1.0 + 0.1 * s.cos(), 2.0 + 0.1 * s.sin()]
    }).collect());
    assert_eq!(small.winding_number().unwrap(), 0);
    assert_eq!(CylinderCurve::vertical_circle(FRAC_PI_2, 0.1).winding_number().unwrap(), 1);
    let reversed = CylinderCurve::closed(
        CylinderCurve::vertical_circle(FRAC_PI_2, 0.1).vertices.into_iter().rev().collect(),
    );
    assert_eq!(reversed.winding_number().unwrap(), -1);
}

#[test]
fn winding_counts_multiple_turns() {
    let turns = CylinderCurve::closed((0..90).map(|i| [1.0 + 0.5 * (i as f64 / 90.0), (3.0 * TAU * i as f64 / 90.0) % TAU]).collect());
    assert_eq!(turns.winding_number().unwrap(), 3);
}

#[test]
fn winding_errors() {
    let coarse = CylinderCurve::closed(vec![[1.0, 0.0], [1.0, PI]]);
    assert!(matches!(coarse.winding_number(), Err(PillowcaseError::AmbiguousLift { .. })));
    let open = CylinderCurve::segment([0.5, 0.0], [0.5, 3.0], 0.1);
    assert_eq!(open.winding_number(), Err(PillowcaseError::NotClosed));
}

#[test]
fn reducible_line_does_not_separate() {
    let g = EmbeddedGraph::new().with(CylinderCurve::reducible_line(0.05), EdgeLabel::ReducibleLine);
    // the path β = π from P to Q stays at distance π from the line
    let path = CylinderCurve::segment([0.0, PI], [PI, PI], 0.05);
    assert!(path.vertices.iter().all(|v| wrap_pi(v[1]).abs() > 3.0));
    assert!(!separates(&g, PillowcasePoint::P, PillowcasePoint::Q, 256).unwrap());
}

#[test]
fn essential_circle_separates() {
    let g = circle(FRAC_PI_2);
    for r in [64, 256, 512] {
        assert!(separates(&g, PillowcasePoint::P, PillowcasePoint::Q, r).unwrap());
    }
    assert_eq!(
        separates_converged(&g, PillowcasePoint::P, PillowcasePoint::Q, 128, 1024).unwrap(),
        (true, 256)
    );
    assert!(has_essential_cycle(&g, 256));
}

#[test]
fn points_on_the_graph_are_rejected() {
    let g = circle(0.005);
    assert!(matches!(
        separates(&g, PillowcasePoint::P, PillowcasePoint::Q, 256),
        Err(PillowcaseError::PointOnGraph { .. })
    ));
    assert!(matches!(
        separates(&circle(1.0), PillowcasePoint::P, PillowcasePoint::Q, 2),
        Err(PillowcaseError::BadResolution(2))
    ));
}

#[test]
fn adding_edges_keeps_separation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut g = circle(2.0);
    for _ in 0..10 {
        let a = [rng.gen_range(0.5..2.6), rng.gen_range(0.0..TAU)];
        let b = [rng.gen_range(0.5..2.6), rng.gen_range(0.0..TAU)];
        g.push(CylinderCurve::segment(a, b, 0.05), EdgeLabel::Other);
        assert!(separates(&g, PillowcasePoint::P, PillowcasePoint::Q, 256).unwrap());
    }
}

#[test]
fn contractible_loop_has_no_essential_cycle() {
    let g = EmbeddedGraph::new().with(
        CylinderCurve::closed((0..40).map(|i| {
            let s = TAU * i as f64 / 40.0;
            [1.5 + 0.5 * s.cos(), 3.0 + 0.5 * s.sin()]
        }).collect()),
        EdgeLabel::Other,
    );
    assert!(!has_essential_cycle(&g, 256));
    assert!(!separates(&g, PillowcasePoint::P, PillowcasePoint::Q, 256).unwrap());
}

#[test]
fn svg_and_csv_rendering() {
    let g = circle(1.0).with(CylinderCurve::reducible_line(0.1), EdgeLabel::ReducibleLine);
    let opts = SvgOptions {
        reproducible: true,
        title: Some("circle".into()),
        ..SvgOptions::default()
    };
    let svg = graph_svg(&g, &opts);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("<polyline") || svg.contains("<path"));
    assert!(svg.contains("circle"));
    assert_eq!(svg, graph_svg(&g, &opts));
    let csv = graph_csv(&g);
    let rows = csv.lines().count();
    assert_eq!(rows, 1 + g.vertex_count());
}

mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use torusrep::torus_dynamics::builder::measure_deviation;
use torusrep::torus_dynamics::fourier::{FourierError, GridSamples};
use torusrep::torus_dynamics::moser::MoserError;
use torusrep::torus_dynamics::perturbation::complete_sl2;
use torusrep::torus_dynamics::{
    apply_shearing, build_shearing_program, derive_time_field, estimate_lipschitz, eval_program, fourier_decompose,
    moser_correct, perturbation_to_map, program_to_perturbation, BuildParams, DecomposeOptions, DeriveOptions,
    FourierField, IsotopySpec, MoserOptions, Segment, ShearingMap, ShearingProfile, ShearingProgram, TimeField,
    TorusPoint,
};

fn prototype() -> ShearingMap {
    ShearingMap::new([1, 0], [0, 1], ShearingProfile::sine(1, 1.0)).unwrap()
}

fn close(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
    torus_dist(a, b) <= tol
}

#[test]
fn prototype_shear_moves_by_profile_value() {
    let q = apply_shearing(&prototype(), TorusPoint::new(0.0, FRAC_PI_2));
    assert!(close(q.to_array(), [1.0, FRAC_PI_2], 1e-15));
}

#[test]
fn zero_profile_is_identity() {
    let m = ShearingMap::new([1, 0], [0, 1], ShearingProfile::zero()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..20 {
        let p = random_point(&mut rng);
        assert_eq!(m.apply_lift(p), p);
    }
}

#[test]
fn one_step_program_is_linear_in_time() {
    let prog = ShearingProgram::single(prototype());
    let q = eval_program(&prog, 0.5, TorusPoint::new(0.0, FRAC_PI_2));
    assert!(close(q.to_array(), [0.5, FRAC_PI_2], 1e-15));
    let p = TorusPoint::new(1.3, 4.1);
    assert!(close(eval_program(&prog, 0.0, p).to_array(), p.to_array(), 0.0));
}

#[test]
fn odd_profiles_commute_with_negation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let m = random_map(&mut rng, 0.5, true);
        let p = random_point(&mut rng);
        let a = m.apply_lift(p);
        let b = m.apply_lift([-p[0], -p[1]]);
        assert_eq!([-a[0], -a[1]], b);
    }
}

#[test]
fn zero_field_has_no_terms() {
    let dec = fourier_decompose(&GridSamples::from_fn(32, |_| [0.0, 0.0]), 8, DecomposeOptions::default()).unwrap();
    assert!(dec.field.terms.is_empty());
}

#[test]
fn sin_y_is_a_single_term() {
    let dec =
        fourier_decompose(&GridSamples::from_fn(64, |p| [p[1].sin(), 0.0]), 8, DecomposeOptions::default()).unwrap();
    assert_eq!(dec.field.terms.len(), 1);
    let t = &dec.field.terms[0];
    assert_eq!(t.k, [0, 1]);
    let u = t.u_sin();
    assert!((u[0] - 1.0).abs() < 1e-12 && u[1].abs() < 1e-12);
    assert_eq!(t.direction()[0] * t.k[0] + t.direction()[1] * t.k[1], 0);
}

#[test]
fn grid_must_resolve_truncation() {
    let err = fourier_decompose(&GridSamples::from_fn(16, |_| [0.0, 0.0]), 8, DecomposeOptions::default());
    assert!(matches!(err, Err(FourierError::GridTooCoarse { .. })));
}

#[test]
fn sawtooth_seam_is_flagged() {
    // (y, 0) with y read in [0, 2π) jumps across the seam y = 0
    let samples = GridSamples::from_fn(64, |p| [p[1].rem_euclid(TAU), 0.0]);
    match fourier_decompose(&samples, 8, DecomposeOptions::default()) {
        Err(FourierError::DivergenceTooLarge { .. }) => {}
        Ok(dec) => assert!(
            dec.truncation_residual > 0.1,
            "truncation residual {}",
            dec.truncation_residual
        ),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn non_solenoidal_samples_are_rejected() {
    let samples = GridSamples::from_fn(32, |p| [p[0].sin(), 0.0]);
    assert!(matches!(
        fourier_decompose(&samples, 4, DecomposeOptions::default()),
        Err(FourierError::DivergenceTooLarge { .. })
    ));
}

fn autonomous(coeffs: &[([i64; 2], [f64; 2])], constant: [f64; 2]) -> TimeField {
    let c: Vec<_> = coeffs.iter().map(|&(k, u)| (k, u, [0.0, 0.0])).collect();
    TimeField::autonomous(FourierField::from_coefficients(&c, constant, 1e-12).unwrap(), 64)
}

#[test]
fn lipschitz_estimates() {
    let constant = estimate_lipschitz(&autonomous(&[], [0.3, -0.2]));
    assert!(constant <= 1.1e-8);
    let shear = estimate_lipschitz(&autonomous(&[([0, 1], [1.0, 0.0])], [0.0, 0.0]));
    assert!((0.95..=1.15).contains(&shear), "{shear}");
    let both = estimate_lipschitz(&autonomous(&[([0, 1], [1.0, 0.0]), ([1, 0], [0.0, 1.0])], [0.0, 0.0]));
    assert!((0.95..=1.15).contains(&both), "{both}");
}

#[test]
fn single_shearing_field_gives_one_step() {
    let field = autonomous(&[([0, 1], [0.7, 0.0])], [0.0, 0.0]);
    let (prog, cert) = build_shearing_program(&field, 0.05, &BuildParams::default()).unwrap();
    assert_eq!(prog.step_count(), 1);
    assert!(cert.eps2 <= 1e-12 && cert.eps3 <= 1e-12, "{cert:?}");
    let times: Vec<f64> = (0..5).map(|r| r as f64 / 4.0).collect();
    let (dev, _) = measure_deviation(&field, &prog, 16, &times, 1e-3);
    assert!(dev.max <= 1e-10, "{}", dev.max);
}

#[test]
fn build_rejects_nonpositive_eps() {
    let field = autonomous(&[([0, 1], [1.0, 0.0])], [0.0, 0.0]);
    assert!(build_shearing_program(&field, 0.0, &BuildParams::default()).is_err());
}

#[test]
fn derived_field_of_constant_isotopy_vanishes() {
    let opts = DeriveOptions {
        grid: 16,
        ..DeriveOptions::default()
    };
    let f = derive_time_field(|_, p| p, 3, opts).unwrap();
    for t in [0.0, 0.5, 1.0] {
        for p in [[0.1, 0.2], [3.0, 5.0]] {
            let v = f.eval(t, p);
            assert!(v[0].abs() < 1e-9 && v[1].abs() < 1e-9);
        }
    }
}

#[test]
fn derived_field_of_translation() {
    let opts = DeriveOptions {
        grid: 16,
        ..DeriveOptions::default()
    };
    let f = derive_time_field(|t, p| [p[0] + t, p[1]], 5, opts).unwrap();
    for t in [0.0, 0.3, 1.0] {
        let v = f.eval(t, [1.0, 2.0]);
        assert!((v[0] - 1.0).abs() < 1e-6 && v[1].abs() < 1e-6);
    }
}

#[test]
fn derived_field_of_a_shear_flow() {
    let opts = DeriveOptions {
        grid: 32,
        ..DeriveOptions::default()
    };
    let f = derive_time_field(|t, p| [p[0] + t * p[1].sin(), p[1]], 5, opts).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.25, 0.5, 1.0] {
        for i in 0..32 {
            for j in 0..32 {
                let p = [TAU * i as f64 / 32.0, TAU * j as f64 / 32.0];
                let v = f.eval(t, p);
                worst = worst.max((v[0] - p[1].sin()).abs()).max(v[1].abs());
            }
        }
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn derive_requires_identity_at_zero() {
    assert!(derive_time_field(|_, p| [p[0] + 1.0, p[1]], 3, DeriveOptions::default()).is_err());
}

#[test]
fn sl2_completion_by_extended_euclid() {
    assert_eq!(complete_sl2(1, 0).unwrap(), (0, 1));
    assert_eq!(complete_sl2(2, 3).unwrap(), (1, 2));
    assert!(complete_sl2(2, 4).is_err());
}

#[test]
fn perturbation_of_prototype_step() {
    let steps = program_to_perturbation(&ShearingProgram::single(prototype())).unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!((steps[0].a, steps[0].b, steps[0].c, steps[0].d), (1, 0, 0, 1));
    let q = perturbation_to_map(&steps, 1.0, [0.0, FRAC_PI_2]);
    assert!(close(q, [1.0, FRAC_PI_2], 1e-15));
    assert_eq!(perturbation_to_map(&steps, 0.0, [0.4, 0.5]), [0.4, 0.5]);
}

#[test]
fn perturbation_round_trip_at_time_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let prog = random_program(&mut rng, 0.4, false);
        let steps = program_to_perturbation(&prog).unwrap();
        for _ in 0..10 {
            let p = random_point(&mut rng);
            let a = prog.eval_lift(1.0, p);
            let b = perturbation_to_map(&steps, 1.0, p);
            assert!(torus_dist(a, b) <= 1e-12);
        }
    }
}

#[test]
fn perturbation_of_odd_program_is_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let prog = random_program(&mut rng, 0.4, true);
        let steps = program_to_perturbation(&prog).unwrap();
        let p = random_point(&mut rng);
        for t in [0.3, 0.7, 1.0] {
            let a = perturbation_to_map(&steps, t, p);
            let b = perturbation_to_map(&steps, t, [-p[0], -p[1]]);
            assert_eq!([-a[0], -a[1]], b);
        }
    }
}

#[test]
fn program_segments_must_tile_the_interval() {
    let seg = |start, end| Segment {
        start,
        end,
        maps: vec![prototype()],
        repeats: 1,
    };
    assert!(ShearingProgram::new(vec![seg(0.0, 0.5), seg(0.5, 1.0)]).is_ok());
    assert!(ShearingProgram::new(vec![seg(0.0, 0.4), seg(0.5, 1.0)]).is_err());
    assert!(ShearingProgram::new(vec![seg(0.0, 0.5)]).is_err());
}

#[test]
fn moser_requires_identity_at_zero() {
    let phi = IsotopySpec::Translation { velocity: [1.0, 0.0] }.isotopy();
    let shifted = std::sync::Arc::new(move |t: f64, p: [f64; 2]| {
        let q = phi(t, p);
        [q[0] + 0.5, q[1]]
    });
    let opts = MoserOptions {
        grid: 16,
        time_samples: 2,
        ..MoserOptions::default()
    };
    assert!(matches!(moser_correct(shifted, opts), Err(MoserError::NotIdentityAtZero(_))));
    assert!(matches!(
        moser_correct(IsotopySpec::Identity.isotopy(), MoserOptions { grid: 15, ..opts }),
        Err(MoserError::BadGrid)
    ));
}

#[test]
fn moser_keeps_the_curve() {
    let spec = IsotopySpec::Bump {
        amplitude: 0.2,
        center: [2.0, 3.0],
        radius: 1.2,
    };
    let phi = spec.isotopy();
    let r = moser_correct(
        phi.clone(),
        MoserOptions {
            grid: 64,
            time_samples: 2,
            area_tol: 1e-2,
            ..MoserOptions::default()
        },
    )
    .unwrap();
    let checks = r.check();
    assert!(checks.passed, "{checks:?}");
    assert!(checks.hausdorff.iter().all(|&h| h <= 1e-3));
    // the curve is only preserved as a set, so compare against nearby image points
    let target: Vec<[f64; 2]> = (0..400).map(|i| phi(1.0, [TAU * i as f64 / 400.0, PI])).collect();
    for i in 0..16 {
        let q = r.eval(1, [TAU * i as f64 / 16.0, PI]);
        let d = target.iter().map(|&c| torus_dist(c, q)).fold(f64::INFINITY, f64::min);
        assert!(d < 0.02, "{d}");
    }
}

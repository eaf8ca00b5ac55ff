use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{c, re, CMat, ONE};

fn worked_point() -> Representation {
    // n = 1, k = 2, A = B = 0, v = (1, 0), w = (−1, 0)ᵀ
    Representation::new(
        ONE,
        CMat::zeros(1, 1),
        CMat::zeros(1, 1),
        CMat::from_real(1, 2, &[1.0, 0.0]).unwrap(),
        CMat::from_real(2, 1, &[-1.0, 0.0]).unwrap(),
    )
    .unwrap()
}

#[test]
fn moment_map_of_worked_point() {
    let mu = moment_map(&worked_point()).unwrap();
    assert_eq!(mu, CMat::from_real(1, 1, &[1.0]).unwrap());
}

#[test]
fn moment_map_vanishes_for_commuting_pair() {
    let a = CMat::from_real(2, 2, &[1.0, 2.0, 0.0, 3.0]).unwrap();
    let b = &(&a * &a) + &a.scale(re(-2.0));
    let r = Representation::new(re(1.0), a, b, CMat::zeros(2, 2), CMat::zeros(2, 2)).unwrap();
    assert!(moment_map(&r).unwrap().norm_fro() < 1e-14);
}

#[test]
fn moment_map_rejects_bad_shapes() {
    let mut r = worked_point();
    r.v = CMat::zeros(2, 2);
    assert!(matches!(moment_map(&r), Err(Error::ShapeMismatch(_))));
}

#[test]
fn random_points_are_on_shell() {
    for n in 1..=6 {
        for k in 1..=2 {
            for seed in 0..10 {
                let r = random_point(n, k, c(0.7, -0.3), seed).unwrap();
                assert!(r.residual() < 1e-12 * r.scale(), "n={n} k={k} seed={seed}");
                let lam = r.a.diagonal();
                assert!(crate::linalg::min_gap(&lam) >= 0.5);
                assert!(r.a.is_exactly_diagonal());
            }
        }
    }
}

#[test]
fn random_point_fixed_seed_n4() {
    let r = random_point(4, 2, ONE, 17).unwrap();
    let mu = moment_map(&r).unwrap();
    assert!(mu.dist(&CMat::identity(4)) < 1e-12);
}

#[test]
fn random_point_single_particle_cases() {
    // k = 1, τ = −1: −vw = −1
    let r = random_point(1, 1, re(-1.0), 3).unwrap();
    assert!(((&r.v * &r.w)[(0, 0)] - ONE).norm() < 1e-15);
    let r = random_point(1, 2, ONE, 3).unwrap();
    assert!(((&r.v * &r.w)[(0, 0)] + ONE).norm() < 1e-15);
}

#[test]
fn random_point_rejects_zero_tau() {
    assert!(matches!(random_point(3, 2, re(0.0), 1), Err(Error::InvalidParameter(_))));
    assert!(random_point(0, 2, ONE, 1).is_err());
    assert!(random_point(2, 3, ONE, 1).is_err());
}

#[test]
fn moment_real_worked_point_and_hermitian() {
    assert!(moment_real(&worked_point()).unwrap().norm_fro() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=5 {
        let r = random_point_with_rng(n, 2, c(1.0, 0.5), &mut rng).unwrap();
        let g = random_gauge(n, &mut rng);
        let r = gauge_act(&g, &r).unwrap();
        let m = moment_real(&r).unwrap();
        assert!(m.dist(&m.adjoint()) <= 1e-12 * m.norm_fro().max(1.0));
    }
}

#[test]
fn moment_real_vanishes_for_normal_commuting_data() {
    let a = CMat::diag(&[c(1.0, 2.0), re(-1.0)]);
    let b = CMat::diag(&[re(3.0), c(0.0, 1.0)]);
    let r = Representation::new(ONE, a, b, CMat::zeros(2, 2), CMat::zeros(2, 2)).unwrap();
    assert_eq!(moment_real(&r).unwrap(), CMat::zeros(2, 2));
}

#[test]
fn gauge_identity_and_scalar() {
    let r = random_point(3, 2, ONE, 5).unwrap();
    assert_eq!(gauge_act(&GaugeElement::identity(3), &r).unwrap(), r);

    let s = c(2.0, -1.0);
    let g = GaugeElement::new(CMat::identity(3).scale(s)).unwrap();
    let gr = gauge_act(&g, &r).unwrap();
    assert!(gr.a.dist(&r.a) < 1e-14 && gr.b.dist(&r.b) < 1e-13);
    assert!(gr.v.dist(&r.v.scale(s)) < 1e-14);
    assert!(gr.w.dist(&r.w.scale(ONE / s)) < 1e-14);
    assert!(fingerprint(&gr, None).distance(&fingerprint(&r, None)) < 1e-9);
}

#[test]
fn gauge_rejects_singular() {
    let g = CMat::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
    assert_eq!(GaugeElement::new(g), Err(Error::Singular));
}

#[test]
fn gauge_equivariance_and_fingerprint_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=6 {
        for _ in 0..5 {
            let r = random_point_with_rng(n, 2, c(-0.4, 1.1), &mut rng).unwrap();
            let g = random_gauge(n, &mut rng);
            let gr = gauge_act(&g, &r).unwrap();
            let lhs = moment_map(&gr).unwrap();
            let rhs = &(g.matrix() * &moment_map(&r).unwrap()) * g.inverse_matrix();
            assert!(lhs.dist(&rhs) <= 1e-10 * r.scale());
            let d = fingerprint(&gr, None).distance(&fingerprint(&r, None));
            assert!(d < 1e-9, "n={n} d={d:e}");
        }
    }
}

#[test]
fn fingerprints_separate_independent_points() {
    let mut separated = 0;
    for seed in 0..100u64 {
        let n = 1 + (seed as usize % 4);
        let r1 = random_point(n, 2, ONE, 1000 + seed).unwrap();
        let r2 = random_point(n, 2, ONE, 5000 + seed).unwrap();
        if fingerprint(&r1, None).max_abs_diff(&fingerprint(&r2, None)) > 1e-6 {
            separated += 1;
        }
    }
    assert_eq!(separated, 100);
}

#[test]
fn augment_worked_point() {
    let p = augment(&worked_point()).unwrap();
    assert_eq!(p.a_hat, CMat::unit(2, 2, 0, 1));
    assert_eq!(p.b_hat, CMat::unit(2, 2, 1, 0));
    assert_eq!(p.corner_a(), re(0.0));
    assert_eq!(p.commutator(), CMat::diag(&[re(1.0), re(-1.0)]));
    assert!(tau_hat_predicate(&p, ONE, 1e-12));
    assert_eq!(moment_g(&p), CMat::identity(1));
}

#[test]
fn augment_requires_rank_two() {
    let r = random_point(2, 1, ONE, 0).unwrap();
    assert!(matches!(augment(&r), Err(Error::InvalidParameter(_))));
}

#[test]
fn augment_project_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..100 {
        let n = 1 + i % 6;
        let r = random_point_with_rng(n, 2, c(0.3, 0.9), &mut rng).unwrap();
        let r = gauge_act(&random_gauge(n, &mut rng), &r).unwrap();
        let p = augment(&r).unwrap();
        assert_eq!(p.corner_a(), re(0.0));
        assert_eq!(p.corner_b(), re(0.0));
        assert_eq!(project(&p, 1e-12).unwrap(), r);
    }
}

#[test]
fn project_rejects_corners() {
    let mut p = augment(&worked_point()).unwrap();
    p.b_hat[(1, 1)] = re(0.5);
    assert!(matches!(project(&p, 1e-12), Err(Error::NonzeroCorner(_))));
}

#[test]
fn block_identity_holds_off_shell() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..200 {
        let n = 1 + i % 6;
        let r = Representation::new(
            re(1.0),
            CMat::from_fn(n, n, |_, _| c(rand::Rng::gen_range(&mut rng, -2.0..2.0), rand::Rng::gen_range(&mut rng, -2.0..2.0))),
            CMat::from_fn(n, n, |_, _| c(rand::Rng::gen_range(&mut rng, -2.0..2.0), 0.0)),
            CMat::from_fn(n, 2, |_, _| c(0.0, rand::Rng::gen_range(&mut rng, -2.0..2.0))),
            CMat::from_fn(2, n, |_, _| c(rand::Rng::gen_range(&mut rng, -2.0..2.0), 1.0)),
        )
        .unwrap();
        let p = augment(&r).unwrap();
        assert!(block_commutator_check(&p).unwrap() < 1e-12 * p.scale());
    }
}

#[test]
fn block_identity_without_framing() {
    let a = CMat::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
    let b = CMat::from_real(2, 2, &[0.0, 1.0, -1.0, 2.0]).unwrap();
    let r = Representation::new(ONE, a.clone(), b.clone(), CMat::zeros(2, 2), CMat::zeros(2, 2)).unwrap();
    let p = augment(&r).unwrap();
    let cm = p.commutator();
    assert_eq!(cm.block(0, 0, 2, 2), crate::linalg::comm(&a, &b).unwrap());
    assert_eq!(cm.block(0, 2, 2, 1), CMat::zeros(2, 1));
    assert_eq!(cm.block(2, 0, 1, 2), CMat::zeros(1, 2));
}

#[test]
fn tau_hat_condition_on_identity_pair() {
    let p = AugmentedPair::new(ONE, CMat::identity(3), CMat::identity(3)).unwrap();
    assert!(!tau_hat_predicate(&p, ONE, 1e-9));
    assert!(tau_hat_predicate(&p, re(0.0), 1e-9));
}

#[test]
fn augmented_on_shell_points_satisfy_tau_hat_condition() {
    for seed in 0..20 {
        let r = random_point(1 + seed as usize % 5, 2, c(1.0, -2.0), seed).unwrap();
        let p = augment(&r).unwrap();
        assert!(moment_g(&p).dist(&CMat::identity(r.n).scale(r.tau)) < 1e-12 * p.scale());
        assert!(tau_hat_predicate(&p, r.tau, 1e-12));
    }
}

#[test]
fn tau_hat_is_traceless() {
    for n in 1..6 {
        assert_eq!(tau_hat(n, c(1.5, -0.5)).trace(), re(0.0));
    }
}

#[test]
fn quiver_nu_zero_input() {
    let z = CMat::zeros(2, 2);
    let (nu1, nu2) =
        quiver_nu(&z, &z, &CMat::zeros(2, 1), &CMat::zeros(2, 1), &CMat::zeros(1, 2), &CMat::zeros(1, 2)).unwrap();
    assert_eq!(nu1, z);
    assert_eq!(nu2, re(0.0));
    assert!(quiver_nu(&z, &z, &CMat::zeros(1, 2), &CMat::zeros(2, 1), &CMat::zeros(1, 2), &CMat::zeros(1, 2)).is_err());
}

#[test]
fn dictionary_calibration_is_point_independent() {
    let first = dictionary_calibrate(&random_point(3, 2, ONE, 0).unwrap(), 1e-10).unwrap();
    assert!(!first.admissible.is_empty());
    for seed in 1..20 {
        let r = random_point(1 + seed as usize % 4, 2, c(0.5, 0.5), seed).unwrap();
        let r = gauge_act(&random_gauge(r.n, &mut ChaCha8Rng::seed_from_u64(seed)), &r).unwrap();
        let cal = dictionary_calibrate(&r, 1e-10).unwrap();
        assert_eq!(cal.admissible, first.admissible);
        assert_eq!(cal.literal_admissible, first.literal_admissible);
    }
    // Hand derivation: X₁Y₂ − X₂Y₁ must equal −v₁w₁ − v₂w₂, which forces
    // X₁ = −v_a, Y₂ = w_a, X₂ = v_b, Y₁ = w_b with {a, b} = {1, 2}.
    let expected = vec![
        DictionaryVariant { x1_negated: true, x2_negated: false, swap_v: false, swap_w: true },
        DictionaryVariant { x1_negated: true, x2_negated: false, swap_v: true, swap_w: false },
    ];
    let mut got = first.admissible.clone();
    got.sort();
    let mut want = expected;
    want.sort();
    assert_eq!(got, want);
    assert!(!first.literal_admissible);
}

#[test]
fn representation_json_round_trip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 1..=4 {
        let r = random_point_with_rng(n, 2, c(0.1, -7.25), &mut rng).unwrap();
        let r = gauge_act(&random_gauge(n, &mut rng), &r).unwrap();
        let json = r.to_json();
        let back = Representation::from_json(&json).unwrap();
        assert_eq!(back, r);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["n", "k", "tau", "A", "B", "v", "w"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn representation_json_rejects_bad_shapes() {
    let bad = r#"{"n":1,"k":2,"tau":[1,0],"A":[[[0,0]]],"B":[[[0,0]]],"v":[[[1,0]]],"w":[[[1,0]],[[0,0]]]}"#;
    assert!(Representation::from_json(bad).is_err());
}

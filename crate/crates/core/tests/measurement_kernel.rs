use proptest::prelude::*;
use qmeas::linalg::svd;
use qmeas::scalar::C;
use qmeas::{
    fidelity_pure, random_measurement, random_unitary, CMatrix, DensityMatrix, Error, FamilyId,
    InfoTriple, Measurement, MeasurementF32, MeasurementFile, PureState,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn diag(ops: &[&[f64]]) -> Measurement {
    Measurement::new(ops.iter().map(|d| CMatrix::from_real_diag(d)).collect()).unwrap()
}

fn weak(p: f64) -> Measurement {
    let s = (1.0 - p).sqrt();
    diag(&[&[1.0, s, 1.0], &[0.0, p.sqrt(), 0.0]])
}

fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

/// Mean and standard error of `f` over `n` Haar-random states.
fn haar_moment(dim: usize, n: usize, seed: u64, f: impl Fn(&PureState) -> f64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n)
        .map(|_| f(&PureState::haar_random(dim, &mut rng).unwrap()))
        .collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[test]
fn haar_states_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in 2..=6 {
        for _ in 0..100 {
            let psi = PureState::haar_random(dim, &mut rng).unwrap();
            let n: f64 = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
            assert_close(n, 1.0, 1e-12);
        }
    }
    assert_eq!(PureState::haar_random(1, &mut rng).unwrap_err(), Error::InvalidDimension(1));
}

#[test]
fn haar_first_moment_qutrit() {
    let (mean, se) = haar_moment(3, 100_000, 2, |psi| psi.amplitudes()[0].norm_sqr());
    assert!((mean - 1.0 / 3.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn haar_second_moment_qubit() {
    let (mean, se) = haar_moment(2, 100_000, 3, |psi| psi.amplitudes()[0].norm_sqr().powi(2));
    assert!((mean - 1.0 / 3.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn haar_moments_against_arbitrary_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for dim in [3usize, 4] {
        let phi = PureState::haar_random(dim, &mut rng).unwrap();
        let d = dim as f64;
        let (m1, se1) = haar_moment(dim, 100_000, 5, |psi| psi.fidelity(&phi));
        let (m2, se2) = haar_moment(dim, 100_000, 6, |psi| psi.fidelity(&phi).powi(2));
        assert!((m1 - 1.0 / d).abs() <= 3.0 * se1, "d={dim}: first moment {m1}");
        assert!((m2 - 2.0 / (d * (d + 1.0))).abs() <= 3.0 * se2, "d={dim}: second moment {m2}");
    }
}

#[test]
fn fidelity_examples() {
    let zero = PureState::basis(3, 0).unwrap();
    assert_close(fidelity_pure(&zero, &zero.to_density()).unwrap(), 1.0, 1e-15);
    let mixed = DensityMatrix::maximally_mixed(3).unwrap();
    assert_close(fidelity_pure(&zero, &mixed).unwrap(), 1.0 / 3.0, 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let psi = PureState::haar_random(3, &mut rng).unwrap();
    let noisy = DensityMatrix::depolarized(&psi, 0.96).unwrap();
    assert_close(fidelity_pure(&psi, &noisy).unwrap(), 0.96 + 0.04 / 3.0, 1e-12);
    let qubit = PureState::basis(2, 0).unwrap();
    assert!(matches!(fidelity_pure(&qubit, &mixed), Err(Error::Shape(_))));
}

#[test]
fn density_matrix_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = PureState::haar_random(3, &mut rng).unwrap();
    for e in [0.0, 0.3, 0.963, 1.0] {
        let rho = DensityMatrix::depolarized(&psi, e).unwrap();
        assert!(DensityMatrix::new(rho.matrix().clone(), 1e-12).is_ok());
    }
    let rho1 = DensityMatrix::depolarized(&psi, 1.0).unwrap();
    assert!((rho1.matrix() - &psi.projector()).max_abs() < 1e-15);
    // Trace 2 and a negative eigenvalue are both rejected.
    assert!(DensityMatrix::new(CMatrix::identity(3).scale_real(2.0 / 3.0), 1e-12).is_err());
    assert!(DensityMatrix::new(CMatrix::from_real_diag(&[1.2, -0.2, 0.0]), 1e-12).is_err());
}

#[test]
fn validate_examples() {
    let id = diag(&[&[1.0, 1.0, 1.0]]);
    let v = id.validate(1e-10);
    assert!(v.complete);
    assert_eq!(v.deviation, 0.0);
    assert!(weak(0.36).validate(1e-10).complete);
    let over = diag(&[&[1.0, 1.0, 1.0], &[0.1, 0.0, 0.0]]);
    let v = over.validate(1e-10);
    assert!(!v.complete);
    assert_close(v.deviation, 0.01, 1e-15);
    assert!(matches!(Measurement::new(vec![]), Err(Error::InvalidMeasurement(_))));
    assert!(matches!(
        Measurement::checked(over.kraus().to_vec(), 1e-10),
        Err(Error::Incomplete { .. })
    ));
}

#[test]
fn closed_form_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = Measurement::unitary(random_unitary(3, &mut rng)).unwrap();
    let vn = Measurement::von_neumann(3).unwrap();
    let w = weak(0.36);
    for (m, (g, f, r)) in [
        (&u, (1.0 / 3.0, 1.0, 1.0)),
        (&vn, (0.5, 0.5, 0.0)),
        (&w, (4.36 / 12.0, (2.0 + 0.8) / 3.0, 0.64)),
    ] {
        assert_close(m.info_gain(), g, 1e-12);
        assert_close(m.operation_fidelity(), f, 1e-12);
        assert_close(m.reversibility(), r, 1e-12);
    }
}

#[test]
fn post_measurement_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let psi = PureState::haar_random(3, &mut rng).unwrap();
    let id = diag(&[&[1.0, 1.0, 1.0]]);
    let (out, p) = id.post_measurement(0, &psi).unwrap();
    assert_close(p, 1.0, 1e-12);
    assert_close(out.fidelity(&psi), 1.0, 1e-12);

    let plus = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
    let (out, p) = Measurement::von_neumann(3).unwrap().post_measurement(1, &plus).unwrap();
    assert_close(p, 0.5, 1e-12);
    assert_close(out.fidelity(&PureState::basis(3, 1).unwrap()), 1.0, 1e-12);

    let uniform = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();
    let (out, p) = weak(0.36).post_measurement(1, &uniform).unwrap();
    assert_close(p, 0.12, 1e-12);
    assert_close(out.fidelity(&PureState::basis(3, 1).unwrap()), 1.0, 1e-12);

    let zero = PureState::basis(3, 0).unwrap();
    assert_eq!(
        weak(0.36).post_measurement(1, &zero).unwrap_err(),
        Error::ImpossibleOutcome { outcome: 1 }
    );
    assert!(matches!(
        weak(0.36).post_measurement(2, &zero),
        Err(Error::OutcomeOutOfRange { outcome: 2, count: 2 })
    ));
}

#[test]
fn optimal_estimate_examples() {
    let vn = Measurement::von_neumann(3).unwrap();
    let est = vn.optimal_estimate(2).unwrap();
    assert_close(est.fidelity(&PureState::basis(3, 2).unwrap()), 1.0, 1e-12);
    let est = weak(0.36).optimal_estimate(1).unwrap();
    assert_close(est.fidelity(&PureState::basis(3, 1).unwrap()), 1.0, 1e-12);
}

#[test]
fn optimal_estimate_beats_random_alternatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m: Measurement = random_measurement(3, 3, &mut rng).unwrap();
    let samples: Vec<PureState> = (0..20_000)
        .map(|_| PureState::haar_random(3, &mut rng).unwrap())
        .collect();
    let score = |estimates: &[PureState]| {
        samples
            .iter()
            .map(|psi| {
                (0..m.outcomes())
                    .map(|r| m.probability(r, psi).unwrap() * estimates[r].fidelity(psi))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / samples.len() as f64
    };
    let optimal: Vec<PureState> = (0..m.outcomes()).map(|r| m.optimal_estimate(r).unwrap()).collect();
    let best = score(&optimal);
    for _ in 0..100 {
        let alt: Vec<PureState> = (0..m.outcomes())
            .map(|_| PureState::haar_random(3, &mut rng).unwrap())
            .collect();
        assert!(best >= score(&alt));
    }
}

#[test]
fn optimal_reversal_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u = random_unitary(3, &mut rng);
    let rev = Measurement::unitary(u.clone()).unwrap().optimal_reversal(0).unwrap();
    assert!((&rev.operator - &u.adjoint()).max_abs() < 1e-12);
    assert_close(rev.success_probability(), 1.0, 1e-12);

    let rev = weak(0.36).optimal_reversal(0).unwrap();
    assert!((&rev.operator - &CMatrix::from_real_diag(&[0.8, 1.0, 0.8])).max_abs() < 1e-12);
    assert_close(rev.success_probability(), 0.64, 1e-12);
    let product = &rev.operator * &weak(0.36).kraus()[0];
    assert!((&product - &CMatrix::identity(3).scale_real(0.8)).max_abs() < 1e-12);

    let vn = Measurement::von_neumann(3).unwrap();
    for r in 0..3 {
        let rev = vn.optimal_reversal(r).unwrap();
        assert!(rev.is_null());
        assert_eq!(rev.success_probability(), 0.0);
    }
}

#[test]
fn empirical_triple_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let u = Measurement::unitary(random_unitary(3, &mut rng)).unwrap();
    let emp = u.empirical_triple(10_000, &mut rng).unwrap();
    assert!(emp.mean.max_abs_diff(&InfoTriple::new(1.0 / 3.0, 1.0, 1.0)) < 1e-12);
    assert!(emp.std_error.g < 1e-12 && emp.std_error.f < 1e-12 && emp.std_error.r < 1e-12);

    let m0 = qmeas::family(FamilyId::new(0).unwrap(), 0.5).unwrap();
    for (m, target) in [
        (weak(0.36), InfoTriple::new(4.36 / 12.0, 2.8 / 3.0, 0.64)),
        (m0, InfoTriple::new(5.0 / 12.0, 11.0 / 12.0, 0.5)),
    ] {
        let emp = m.empirical_triple(100_000, &mut rng).unwrap();
        for (x, se, t) in [
            (emp.mean.g, emp.std_error.g, target.g),
            (emp.mean.f, emp.std_error.f, target.f),
            (emp.mean.r, emp.std_error.r, target.r),
        ] {
            assert!((x - t).abs() <= (3.0 * se).max(1e-12), "{x} vs {t}, se {se}");
        }
    }
    assert!(weak(0.36).empirical_triple(0, &mut rng).is_err());
}

#[test]
fn measurement_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let m: Measurement = random_measurement(3, 2, &mut rng).unwrap();
    let text = serde_json::to_string(&m.to_file()).unwrap();
    let file: MeasurementFile = serde_json::from_str(&text).unwrap();
    let back = Measurement::from_file(file).unwrap();
    assert!(back.triple().max_abs_diff(&m.triple()) < 1e-15);
    let wrong_dim: MeasurementFile =
        serde_json::from_str(&text.replacen("\"dim\":3", "\"dim\":4", 1)).unwrap();
    assert!(matches!(Measurement::from_file(wrong_dim), Err(Error::Shape(_))));
}

#[test]
fn single_precision_triples_agree() {
    for t in FamilyId::ALL {
        let (lo, hi) = t.domain();
        for k in 0..=10 {
            let p = lo + (hi - lo) * k as f64 / 10.0;
            let a = qmeas::family::<f64>(t, p).unwrap().triple();
            let b: qmeas::InfoTripleF32 = qmeas::family::<f32>(t, p as f32).unwrap().triple();
            assert!((a.g - b.g as f64).abs() < 1e-5);
            assert!((a.f - b.f as f64).abs() < 1e-5);
            assert!((a.r - b.r as f64).abs() < 1e-5);
        }
    }
    let kraus = Measurement::von_neumann(3)
        .unwrap()
        .kraus()
        .iter()
        .map(|k| k.map(|z| C::new(z.re as f32, z.im as f32)))
        .collect();
    let m = MeasurementF32::new(kraus).unwrap();
    assert!((m.info_gain() - 0.5).abs() < 1e-6);
}

fn random_state(seed: u64) -> PureState {
    PureState::haar_random(3, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>(), dim in 2usize..=5, outcomes in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Measurement = random_measurement(dim, outcomes, &mut rng).unwrap();
        prop_assert!(m.validate(1e-10).complete);
        for _ in 0..100 {
            let psi = PureState::haar_random(dim, &mut rng).unwrap();
            let total: f64 = (0..outcomes).map(|r| m.probability(r, &psi).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn triple_is_admissible(seed in any::<u64>(), dim in 2usize..=5, outcomes in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Measurement = random_measurement(dim, outcomes, &mut rng).unwrap();
        prop_assert!(m.triple().is_admissible(dim, 1e-10));
    }

    #[test]
    fn triple_invariant_under_unitary_factors(seed in any::<u64>(), dim in 2usize..=5, outcomes in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Measurement = random_measurement(dim, outcomes, &mut rng).unwrap();
        let common = random_unitary(dim, &mut rng);
        let rotated: Vec<CMatrix> = m
            .kraus()
            .iter()
            .map(|k| &(&random_unitary(dim, &mut rng) * k) * &common)
            .collect();
        let m2 = Measurement::new(rotated).unwrap();
        prop_assert!(m2.validate(1e-10).complete);
        prop_assert!(m.triple().max_abs_diff(&m2.triple()) < 1e-10);
    }

    #[test]
    fn reversal_restores_inputs(seed in any::<u64>(), dim in 2usize..=5, outcomes in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Measurement = random_measurement(dim, outcomes, &mut rng).unwrap();
        let mut total = 0.0;
        for (r, k) in m.kraus().iter().enumerate() {
            let rev = m.optimal_reversal(r).unwrap();
            total += rev.success_probability();
            prop_assert!(svd(&rev.operator).unwrap().max() <= 1.0 + 1e-10);
            if rev.is_null() {
                continue;
            }
            let product = &rev.operator * k;
            let target = CMatrix::identity(dim).scale_real(rev.success_scale);
            prop_assert!((&product - &target).max_abs() < 1e-10);
            for _ in 0..100 {
                let psi = PureState::haar_random(dim, &mut rng).unwrap();
                let out = PureState::new(product.apply(psi.amplitudes())).unwrap();
                prop_assert!(out.fidelity(&psi) >= 1.0 - 1e-10);
            }
        }
        prop_assert!((total - m.reversibility()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_linear_and_bounded(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), a in 0.0f64..=1.0) {
        let psi = random_state(s1);
        let rho1 = random_state(s2).to_density();
        let rho2 = random_state(s3).to_density();
        let mix = DensityMatrix::new(
            &rho1.matrix().scale_real(a) + &rho2.matrix().scale_real(1.0 - a),
            1e-12,
        ).unwrap();
        let f1 = fidelity_pure(&psi, &rho1).unwrap();
        let f2 = fidelity_pure(&psi, &rho2).unwrap();
        let fm = fidelity_pure(&psi, &mix).unwrap();
        prop_assert!((fm - (a * f1 + (1.0 - a) * f2)).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fm));
    }
}

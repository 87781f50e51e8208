use std::f64::consts::PI;

use super::*;
use crate::hilbert::{
    embed, number, qutrit_operator, CsrMatrix, DensityMatrix, Levels, Matrix, Qutrit, QutritOp,
    StateVector, C64, ONE, ZERO,
};

fn reference_params() -> DeviceParams {
    let d1 = mhz(-3.57);
    let delta = [d1, 2.0 * d1];
    let g = [d1.abs() / 2.0, 2.0 * d1.abs() / 8f64.sqrt()];
    let settings = DeviceSettings {
        g12_ratio: 0.1,
        ..Default::default()
    };
    settings.device_params(&delta, &g, 6.0 * d1.abs(), &[1, 2], 12)
}

fn single_params() -> DeviceParams {
    let d1 = mhz(-3.57);
    DeviceSettings::default().device_params(&[d1], &[d1.abs() / 2.0], 6.0 * d1.abs(), &[1], 12)
}

/// Deterministic pseudo-random numbers in `[0, 1)`.
fn lcg(seed: &mut u64) -> f64 {
    *seed = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (*seed >> 11) as f64 / (1u64 << 53) as f64
}

fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let mut s = seed;
    let a = Matrix::from_fn(dim, dim, |_, _| {
        C64::new(lcg(&mut s) - 0.5, lcg(&mut s) - 0.5)
    });
    let rho = &a * a.adjoint();
    let rho = &rho / rho.trace();
    let data: Vec<C64> = (0..dim * dim).map(|i| rho[(i / dim, i % dim)]).collect();
    DensityMatrix::from_row_major(dim, data).unwrap()
}

fn dense_of(d: &[C64], dim: usize) -> Matrix {
    Matrix::from_row_slice(dim, dim, d)
}

#[test]
fn registry_lists_all_models() {
    let r = ModelRegistry::with_defaults();
    let names: Vec<_> = r.names().collect();
    assert_eq!(names, ["effective", "full", "ideal", "rotated", "unwanted"]);
    assert!(matches!(r.get("bogus"), Err(ModelError::UnknownModel(_))));
    assert_eq!(r.get("full").unwrap().frame(), Frame::Interaction);
    assert_eq!(r.get("effective").unwrap().frame(), Frame::Rotated);
}

#[test]
fn every_model_hermitian_at_random_times() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    let registry = ModelRegistry::with_defaults();
    let mut seed = 7;
    let period = 2.0 * PI / mhz(3.57);
    for model in registry.iter() {
        let h = model.build(&p, &layout).unwrap();
        let compiled = h.compile();
        for _ in 0..50 {
            let t = lcg(&mut seed) * period;
            let m = compiled.evaluate(t);
            let scale = m.max_abs().max(1.0);
            assert!(
                m.hermitian_defect() / scale < 1e-12,
                "{} at t = {t}",
                model.name()
            );
        }
    }
}

#[test]
fn ideal_at_zero_without_drive_is_exchange() {
    let mut p = single_params();
    p.rabi = 0.0;
    let layout = HilbertLayout::new(1, Levels::Two, 2).unwrap();
    let h = build_h_ideal(0.0, &p, &layout).unwrap().to_dense();
    let a = crate::hilbert::annihilation(3).unwrap();
    let sm = qutrit_operator(QutritOp::SigmaMinus, Levels::Two).unwrap();
    let id2 = Matrix::identity(2, 2);
    // A ⊗ q1 ⊗ c1
    let x1 = id2.kronecker(&sm).kronecker(&a.adjoint());
    let xa = sm.kronecker(&id2).kronecker(&a.adjoint());
    let expected = (&x1 + x1.adjoint()) * C64::new(p.g[0], 0.0)
        + (&xa + xa.adjoint()) * C64::new(p.g_a[0], 0.0);
    assert!((h - expected).norm() < 1e-9);
}

#[test]
fn exchange_matrix_element_index_arithmetic() {
    let p = single_params();
    let layout = HilbertLayout::new(1, Levels::Three, 3).unwrap();
    let t = 0.123e-6;
    let h = build_h_ideal(t, &p, &layout).unwrap();
    // <g_A, g_1, 1| H |g_A, e_1, 0> = g e^{-iδt}
    let row = layout.index_of(&[0, 0, 1]);
    let col = layout.index_of(&[0, 1, 0]);
    let expected = C64::from_polar(p.g[0], -p.delta[0] * t);
    assert!((h.get(row, col) - expected).norm() < 1e-6);
    assert!((h.get(col, row) - expected.conj()).norm() < 1e-6);
}

#[test]
fn rotated_without_drive_matches_ideal_without_drive() {
    let mut p = reference_params();
    p.rabi = 0.0;
    let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    for t in [0.0, 0.05e-6, 0.21e-6] {
        let a = build_h_rotated(t, &p, &layout).unwrap().to_dense();
        let b = build_h_ideal(t, &p, &layout).unwrap().to_dense();
        assert!((&a - &b).norm() / b.norm() < 1e-12);
    }
}

#[test]
fn rotated_period_average_approaches_effective() {
    // Strong drive: 2Ω = 60|δ2|, averaged over one drive period.
    let d1 = mhz(-3.57);
    let p = DeviceSettings::default().device_params(
        &[d1, 2.0 * d1],
        &[d1.abs() / 2.0, 2.0 * d1.abs() / 8f64.sqrt()],
        60.0 * d1.abs(),
        &[1, 2],
        120,
    );
    let layout = HilbertLayout::new(2, Levels::Two, 2).unwrap();
    let rot = RotatedModel.build(&p, &layout).unwrap().compile();
    let eff = EffectiveModel.build(&p, &layout).unwrap().compile();
    let period = PI / p.rabi;
    let t0 = 0.1e-6;
    let samples = 400;
    let dim = layout.total_dim();
    let (mut avg_rot, mut avg_eff) = (Matrix::zeros(dim, dim), Matrix::zeros(dim, dim));
    for i in 0..samples {
        let t = t0 + period * (i as f64 + 0.5) / samples as f64;
        avg_rot += rot.evaluate(t).to_dense();
        avg_eff += eff.evaluate(t).to_dense();
    }
    let rel = (avg_rot - &avg_eff).norm() / avg_eff.norm();
    let expected_scale = 2.0 * p.delta[1].abs() / (2.0 * p.rabi);
    assert!(rel < expected_scale, "relative residue {rel}");
}

#[test]
fn effective_sector_factors() {
    let p = single_params();
    let layout = HilbertLayout::new(1, Levels::Two, 2).unwrap();
    let h = build_h_eff(0.0, &p, &layout).unwrap().to_dense();
    let plus = crate::hilbert::plus_ket(Levels::Two);
    let minus = crate::hilbert::minus_ket(Levels::Two);
    let vac1 = [ONE, ZERO, ZERO];
    let one1 = [ZERO, ONE, ZERO];
    let state = |a: &[C64], q: &[C64], c: &[C64]| -> nalgebra::DVector<C64> {
        let v = nalgebra::DVector::from_column_slice(a)
            .kronecker(&nalgebra::DVector::from_column_slice(q))
            .kronecker(&nalgebra::DVector::from_column_slice(c));
        v
    };
    // |-_A +_1> sector is decoupled.
    let psi = state(&minus, &plus, &vac1);
    assert!((&h * &psi).norm() < 1e-6);
    // |+_A +_1>: H|0> = g |1>, factor 2 times g/2.
    let psi = state(&plus, &plus, &vac1);
    let expected = state(&plus, &plus, &one1) * C64::new(p.g[0], 0.0);
    assert!((&h * &psi - expected).norm() < 1e-6);
    // |-_A -_1>: factor -2.
    let psi = state(&minus, &minus, &vac1);
    let expected = state(&minus, &minus, &one1) * C64::new(-p.g[0], 0.0);
    assert!((&h * &psi - expected).norm() < 1e-6);
}

#[test]
fn effective_terms_commute_across_cavities() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Two, 3).unwrap();
    let h = EffectiveModel.build(&p, &layout).unwrap();
    for t in [0.0, 0.037e-6, 0.19e-6] {
        let part = |j: &str| {
            CsrMatrix::from_triplets(
                layout.total_dim(),
                h.terms()
                    .iter()
                    .filter(|term| term.label.starts_with(j))
                    .flat_map(|term| {
                        let c = term.coeff.at(t);
                        term.op.triplets().map(move |(r, col, v)| (r, col, c * v))
                    })
                    .collect::<Vec<_>>(),
            )
        };
        let (h1, h2) = (part("a1"), part("a2"));
        assert!(h1.nnz() > 0 && h2.nnz() > 0);
        let comm = h1.commutator(&h2).unwrap();
        assert!(comm.max_abs() / (h1.max_abs() * h2.max_abs()) < 1e-12);
    }
}

#[test]
fn effective_warns_but_builds_when_conditions_fail() {
    let mut p = single_params();
    p.g_a[0] *= 1.3;
    let layout = HilbertLayout::new(1, Levels::Two, 2).unwrap();
    assert!(EffectiveModel.build(&p, &layout).is_ok());
}

#[test]
fn theta_needs_three_levels() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Two, 2).unwrap();
    assert!(matches!(
        build_theta(0.0, &p, &layout),
        Err(ModelError::NeedsThreeLevels(_))
    ));
    assert!(matches!(
        build_h_full(0.0, &p, &layout),
        Err(ModelError::NeedsThreeLevels(_))
    ));
}

#[test]
fn theta_vanishes_without_unwanted_couplings() {
    let mut p = reference_params();
    p.g12 = 0.0;
    p.gt.iter_mut().for_each(|x| *x = 0.0);
    p.gt_a.iter_mut().for_each(|x| *x = 0.0);
    p.rabi_fe = 0.0;
    let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    assert!(UnwantedModel.build(&p, &layout).unwrap().is_empty());
    assert_eq!(build_theta(0.3e-6, &p, &layout).unwrap().nnz(), 0);
}

#[test]
fn theta_has_no_g_f_coupling() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    let theta = build_theta(0.1e-6, &p, &layout).unwrap();
    assert!(theta.nnz() > 0);
    for (r, c, _) in theta.triplets() {
        for l in layout.qutrits() {
            let s = layout.qutrit(l);
            let pair = (layout.digit(r, s), layout.digit(c, s));
            assert!(
                pair != (0, 2) && pair != (2, 0),
                "g-f element at ({r}, {c})"
            );
        }
    }
}

#[test]
fn crosstalk_only_between_first_two_cavities() {
    let d1 = mhz(-3.0);
    let settings = DeviceSettings {
        g12_ratio: 0.2,
        ..Default::default()
    };
    let p = settings.device_params(
        &[d1, 2.0 * d1, 3.0 * d1],
        &[1e6, 1e6, 1e6],
        12.0 * d1.abs(),
        &[1, 2, 3],
        12,
    );
    let layout = HilbertLayout::new(3, Levels::Three, 1).unwrap();
    let h = UnwantedModel.build(&p, &layout).unwrap();
    let labels: Vec<_> = h
        .terms()
        .iter()
        .filter(|t| t.label.starts_with("g12"))
        .collect();
    assert_eq!(labels.len(), 2);
    assert!((labels[0].coeff.amplitude.re - 0.2e6).abs() < 1e-6);
}

#[test]
fn full_is_ideal_plus_theta() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    let t = 0.17e-6;
    let full = build_h_full(t, &p, &layout).unwrap();
    let sum = build_h_ideal(t, &p, &layout)
        .unwrap()
        .add(&build_theta(t, &p, &layout).unwrap())
        .unwrap();
    assert!(full.sub(&sum).unwrap().max_abs() < 1e-6);
}

#[test]
fn collapse_set_respects_levels() {
    let layout3 = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    let layout2 = HilbertLayout::new(2, Levels::Two, 2).unwrap();
    let np = NoiseParams::from_lifetimes(2, &Lifetimes::default());
    assert_eq!(collapse_operators(&np, &layout3).unwrap().len(), 2 + 3 * 5);
    assert_eq!(collapse_operators(&np, &layout2).unwrap().len(), 2 + 3 * 2);
    assert!(collapse_operators(&NoiseParams::none(2), &layout3)
        .unwrap()
        .is_empty());
    let mut bad = np.clone();
    bad.kappa[0] = -1.0;
    assert!(matches!(
        collapse_operators(&bad, &layout3),
        Err(ModelError::InvalidNoise(_))
    ));
}

#[test]
fn noiseless_rhs_is_commutator() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Three, 1).unwrap();
    let dim = layout.total_dim();
    let rho = random_density(dim, 3);
    let t = 0.09e-6;
    let d = lindblad_rhs(&rho, t, &FullModel, &p, &NoiseParams::none(2), &layout).unwrap();
    let h = build_h_full(t, &p, &layout).unwrap().to_dense();
    let r = rho.to_matrix();
    let expected = (&h * &r - &r * &h) * C64::new(0.0, -1.0);
    assert!((d - &expected).norm() / expected.norm() < 1e-12);
}

fn dense_lindblad(h: &Matrix, ops: &[CollapseOp], r: &Matrix) -> Matrix {
    let mut d = (h * r - r * h) * C64::new(0.0, -1.0);
    for c in ops {
        let l = c.op.to_dense();
        let ld = l.adjoint();
        let ldl = &ld * &l;
        d += (&l * r * &ld - (&ldl * r + r * &ldl) * C64::new(0.5, 0.0)) * C64::new(c.rate, 0.0);
    }
    d
}

#[test]
fn lossy_rhs_matches_dense_formula() {
    let p = reference_params();
    let layout = HilbertLayout::new(2, Levels::Three, 1).unwrap();
    let dim = layout.total_dim();
    let np = NoiseParams::from_lifetimes(2, &Lifetimes::default());
    let rho = random_density(dim, 11);
    let t = 0.2e-6;
    let d = lindblad_rhs(&rho, t, &FullModel, &p, &np, &layout).unwrap();
    let h = build_h_full(t, &p, &layout).unwrap().to_dense();
    let expected = dense_lindblad(
        &h,
        &collapse_operators(&np, &layout).unwrap(),
        &rho.to_matrix(),
    );
    assert!((&d - &expected).norm() / expected.norm() < 1e-12);
    // Trace preserved, Hermitian output.
    let scale = d.norm();
    assert!(d.trace().norm() / scale < 1e-12);
    assert!((&d - d.adjoint()).norm() == 0.0);
}

#[test]
fn non_monomial_jump_operator() {
    let layout = HilbertLayout::new(1, Levels::Three, 2).unwrap();
    let dim = layout.total_dim();
    let sx = qutrit_operator(QutritOp::SigmaPlus, Levels::Three).unwrap()
        + qutrit_operator(QutritOp::SigmaMinus, Levels::Three).unwrap()
        + qutrit_operator(QutritOp::SigmaFePlus, Levels::Three).unwrap();
    let op = embed(&sx, layout.qutrit(Qutrit::Target(1)), &layout).unwrap();
    assert!(op.as_monomial().is_none());
    let ops = vec![CollapseOp {
        label: "x".into(),
        rate: 2.5e5,
        op,
    }];
    let h = TimeDependentHamiltonian::new(dim);
    let gen = LindbladGenerator::new(&h, &ops).unwrap();
    let rho = random_density(dim, 5);
    let d = dense_of(&gen.rhs(0.0, rho.data()), dim);
    let expected = dense_lindblad(&Matrix::zeros(dim, dim), &ops, &rho.to_matrix());
    assert!((d - &expected).norm() / expected.norm() < 1e-12);
}

#[test]
fn dephasing_fixes_maximally_mixed_state() {
    let layout = HilbertLayout::new(2, Levels::Three, 1).unwrap();
    let dim = layout.total_dim();
    let mut np = NoiseParams::none(2);
    np.gamma_phi_e = vec![1e5; 3];
    np.gamma_phi_f = vec![2e5; 3];
    let gen = LindbladGenerator::new(
        &TimeDependentHamiltonian::new(dim),
        &collapse_operators(&np, &layout).unwrap(),
    )
    .unwrap();
    let rho = DensityMatrix::maximally_mixed(dim);
    assert!(gen.rhs(0.0, rho.data()).iter().all(|v| v.norm() < 1e-9));
}

#[test]
fn single_photon_decays_at_kappa() {
    let layout = HilbertLayout::new(1, Levels::Two, 3).unwrap();
    let dim = layout.total_dim();
    let mut np = NoiseParams::none(1);
    let kappa = rate_from_us(15.0);
    np.kappa = vec![kappa];
    let gen = LindbladGenerator::new(
        &TimeDependentHamiltonian::new(dim),
        &collapse_operators(&np, &layout).unwrap(),
    )
    .unwrap();
    let idx = layout.index_of(&[0, 0, 1]);
    let rho = DensityMatrix::from_pure(&StateVector::basis(dim, idx));
    let d = dense_of(&gen.rhs(0.0, rho.data()), dim);
    let n_op = embed(&number(4).unwrap(), layout.cavity(1), &layout)
        .unwrap()
        .to_dense();
    let dn = (n_op * d).trace();
    assert!((dn.re + kappa).abs() / kappa < 1e-12 && dn.im.abs() < 1e-6);
}

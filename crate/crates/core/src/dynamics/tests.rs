use std::f64::consts::{FRAC_PI_2, PI};

use super::*;
use crate::gates::{
    default_phase_fix_index, excited_initial_state, ideal_gate_unitary, propagator_distance,
    GateSpec,
};
use crate::geometric::{cycle_time, solve_plan, total_phase};
use crate::hilbert::{embed, number, Qutrit};
use crate::model::{mhz, rate_from_us, DeviceSettings, FullModel, Lifetimes};

fn reference_params(k: u32) -> DeviceParams {
    let plan = solve_plan(&[FRAC_PI_2, FRAC_PI_2], &[1, 2], mhz(-3.57), k).unwrap();
    plan.device_params(&DeviceSettings {
        g12_ratio: 0.1,
        ..Default::default()
    })
}

fn t_gate() -> f64 {
    cycle_time(1, mhz(-3.57)).unwrap()
}

#[test]
fn grid_lands_on_end() {
    let g = TimeGrid::new(0.0, 1.0, 0.3).unwrap();
    assert_eq!(g.n_steps(), 4);
    assert_eq!(g.time(4), 1.0);
    assert!(g.step() <= 0.3);
    assert_eq!(TimeGrid::new(0.0, 1.0, 0.25).unwrap().n_steps(), 4);
    assert_eq!(g.halved().n_steps(), 8);
    assert!(TimeGrid::new(0.0, 1.0, 2.0).is_err());
    assert!(TimeGrid::new(1.0, 1.0, 0.1).is_err());
    assert!(TimeGrid::new(0.0, 1.0, -0.1).is_err());
}

#[test]
fn default_step_resolves_anharmonic_terms() {
    let p = reference_params(12);
    let t = t_gate();
    let step3 = default_step(&p, Levels::Three, t);
    let fastest = (mhz(-7.14) - 0.05 * crate::model::ghz(6.5)).abs() + 3.0 * p.rabi;
    assert!((step3 - 2.0 * PI / (40.0 * fastest)).abs() < 1e-18);
    // Two-level: 2Ω is fastest but T/2000 is tighter.
    assert!((default_step(&p, Levels::Two, t) - t / 2000.0).abs() < 1e-20);
}

#[test]
fn zero_hamiltonian_is_identity() {
    let layout = HilbertLayout::new(1, Levels::Two, 2).unwrap();
    let h = TimeDependentHamiltonian::new(layout.total_dim());
    let psi = StateVector::normalized((0..12).map(|i| C64::new(i as f64, 1.0)).collect()).unwrap();
    let out = propagate_unitary(&h, &psi, &TimeGrid::new(0.0, 1e-6, 1e-8).unwrap()).unwrap();
    assert_eq!(out, psi);
}

/// Phase picked up by the rotated sector `(a_minus, t_minus)` ⊗ vacuum under
/// the effective model, plus its vacuum return probability.
fn sector_run(m: u32, a_minus: bool, t_minus: bool) -> (f64, f64, f64) {
    let d = mhz(-3.57) * m as f64;
    let g = d.abs() / 2.0 * (m as f64).sqrt().recip();
    let p = DeviceSettings::default().device_params(&[d], &[g], 6.0 * d.abs(), &[m], 12);
    let layout = HilbertLayout::new(1, Levels::Two, 10).unwrap();
    let t = cycle_time(m, d).unwrap();
    let grid = TimeGrid::for_gate(&p, Levels::Two, t, None).unwrap();
    let b = (a_minus as usize) << 1 | t_minus as usize;
    let psi0 = rotated_state(&layout, &StateVector::basis(4, b)).unwrap();
    let psi = propagate_unitary(&EffectiveModel.build(&p, &layout).unwrap(), &psi0, &grid).unwrap();
    let overlap = psi0.inner(&psi);
    (
        overlap.arg(),
        overlap.norm_sqr(),
        total_phase(g, d, m).unwrap(),
    )
}

#[test]
fn effective_sectors_return_to_vacuum_with_formula_phase() {
    for m in [1, 2] {
        for (a, t) in [(false, false), (true, true)] {
            let (phase, pop, theta) = sector_run(m, a, t);
            assert!(pop >= 1.0 - 1e-4, "m={m} pop {pop}");
            assert!(
                (phase - theta).abs() < 1e-3,
                "m={m} phase {phase} vs {theta}"
            );
        }
        for (a, t) in [(false, true), (true, false)] {
            let (phase, pop, _) = sector_run(m, a, t);
            assert!(pop >= 1.0 - 1e-12);
            assert!(phase.abs() < 1e-4);
        }
    }
}

#[test]
fn unitary_norm_preserved_with_full_model() {
    let p = reference_params(12);
    let layout = HilbertLayout::new(2, Levels::Three, 3).unwrap();
    let grid = TimeGrid::for_gate(&p, Levels::Three, t_gate(), None).unwrap();
    let psi0 = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let psi = propagate_unitary(&FullModel.build(&p, &layout).unwrap(), &psi0, &grid).unwrap();
    assert!((psi.norm() - 1.0).abs() < 1e-7);
}

#[test]
fn coarse_step_reports_failure() {
    let p = reference_params(12);
    let layout = HilbertLayout::new(2, Levels::Three, 2).unwrap();
    let grid = TimeGrid::new(0.0, t_gate(), t_gate() / 50.0).unwrap();
    let psi0 = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let err = propagate_unitary(&FullModel.build(&p, &layout).unwrap(), &psi0, &grid).unwrap_err();
    assert!(matches!(err, DynamicsError::IntegrationFailure { .. }));
}

#[test]
fn noiseless_lindblad_matches_pure_state() {
    let p = reference_params(12);
    let layout = HilbertLayout::new(2, Levels::Three, 1).unwrap();
    let grid = TimeGrid::for_gate(&p, Levels::Three, t_gate(), None).unwrap();
    let psi0 = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let psi = propagate_unitary(&FullModel.build(&p, &layout).unwrap(), &psi0, &grid).unwrap();
    let res = propagate_lindblad(
        &DensityMatrix::from_pure(&psi0),
        &p,
        &NoiseParams::none(2),
        &layout,
        &grid,
        &FullModel,
        Some(&psi),
    )
    .unwrap();
    let expected = DensityMatrix::from_pure(&psi);
    let worst = res
        .final_state
        .data()
        .iter()
        .zip(expected.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max deviation {worst}");
    assert!((res.fidelity.unwrap() - 1.0).abs() < 1e-6);
    assert!(res.diagnostics.trace_drift < 1e-6);
    assert!(res.diagnostics.positivity_ok());
}

#[test]
fn lone_cavity_decay() {
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
    let rho0 = DensityMatrix::from_pure(&StateVector::basis(dim, layout.index_of(&[0, 0, 1])));
    let n_op = embed(&number(4).unwrap(), layout.cavity(1), &layout).unwrap();
    for t_end in [1e-6, 5e-6, 15e-6] {
        let grid = TimeGrid::new(0.0, t_end, 1e-8).unwrap();
        let (rho, diag) = evolve_density(&gen, &rho0, &layout, &grid).unwrap();
        let n: f64 = n_op
            .triplets()
            .map(|(r, c, v)| (v * rho.get(c, r)).re)
            .sum();
        assert!(
            (n - (-kappa * t_end).exp()).abs() < 1e-6,
            "t = {t_end}: {n}"
        );
        assert!(diag.trace_drift < 1e-12);
        assert_eq!(diag.hermiticity_defect, 0.0);
    }
}

#[test]
fn fidelity_examples() {
    let psi = StateVector::basis(4, 2);
    assert!((fidelity(&DensityMatrix::from_pure(&psi), &psi).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(
        fidelity(&DensityMatrix::from_pure(&StateVector::basis(4, 1)), &psi).unwrap(),
        0.0
    );
    assert!((fidelity(&DensityMatrix::maximally_mixed(4), &psi).unwrap() - 0.5).abs() < 1e-15);
    assert!(fidelity(&DensityMatrix::maximally_mixed(3), &psi).is_err());
}

#[test]
fn frame_transform_properties() {
    let layout = HilbertLayout::new(2, Levels::Three, 1).unwrap();
    let omega = mhz(21.42);
    let t = 12.0 * PI / omega;
    assert!(frame_phase_spread(omega, t, 3) < 1e-10);
    let psi = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let back = frame_transform(&psi, omega, t, &layout).unwrap();
    assert!((psi.inner(&back) - 1.0).norm() < 1e-10);
    // ΩT = π/2 on |+>: e^{-iπ/2}; on |->: e^{iπ/2}.
    let single = HilbertLayout::new(1, Levels::Three, 1).unwrap();
    let plus_plus = rotated_state(&single, &StateVector::basis(4, 0)).unwrap();
    let minus_plus = rotated_state(&single, &StateVector::basis(4, 2)).unwrap();
    let tq = FRAC_PI_2 / omega;
    let a = frame_transform(&plus_plus, omega, tq, &single).unwrap();
    assert!((plus_plus.inner(&a) - C64::new(-1.0, 0.0)).norm() < 1e-12);
    let b = frame_transform(&minus_plus, omega, tq, &single).unwrap();
    assert!((minus_plus.inner(&b) - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(frame_phase_spread(omega, tq, 2) > 1.0);
    // Composition.
    let (t1, t2) = (0.013e-6, 0.071e-6);
    let u12 = frame_unitary(omega, t1, &layout)
        .unwrap()
        .matmul(&frame_unitary(omega, t2, &layout).unwrap())
        .unwrap();
    let u = frame_unitary(omega, t1 + t2, &layout).unwrap();
    assert!(u12.sub(&u).unwrap().max_abs() < 1e-12);
    // The |f> level is untouched.
    let f_idx = layout.index_of(&[2, 2, 2, 0, 0]);
    assert!((u.get(f_idx, f_idx) - C64::new(1.0, 0.0)).norm() < 1e-15);
    let _ = Qutrit::Coupler;
}

#[test]
fn density_frame_transform_matches_pure() {
    let layout = HilbertLayout::new(1, Levels::Three, 1).unwrap();
    let psi = StateVector::normalized(
        (0..18)
            .map(|i| C64::new(1.0 + i as f64, (i as f64).sin()))
            .collect(),
    )
    .unwrap();
    let (omega, t) = (mhz(5.0), 0.031e-6);
    let a = DensityMatrix::from_pure(&frame_transform(&psi, omega, t, &layout).unwrap());
    let b = frame_transform_density(&DensityMatrix::from_pure(&psi), omega, t, &layout).unwrap();
    let worst = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-14);
}

#[test]
fn effective_propagator_reproduces_gate() {
    let p = reference_params(12);
    let layout = HilbertLayout::new(2, Levels::Two, 10).unwrap();
    let grid = TimeGrid::for_gate(&p, Levels::Two, t_gate(), None).unwrap();
    let u = simulated_propagator(&EffectiveModel, &p, &layout, &grid).unwrap();
    let ideal = ideal_gate_unitary(&GateSpec::generic(vec![FRAC_PI_2, FRAC_PI_2])).unwrap();
    let cmp = propagator_distance(&u, &ideal, default_phase_fix_index(2)).unwrap();
    assert!(cmp.fidelity > 0.999, "{cmp:?}");
    assert!(cmp.max_abs < 1e-3, "{cmp:?}");
}

#[test]
fn rwa_check_improves_with_drive() {
    let layout = HilbertLayout::new(2, Levels::Two, 5).unwrap();
    let initial = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let run = |k| {
        let p = reference_params(k);
        let grid = TimeGrid::for_gate(&p, Levels::Two, t_gate(), None).unwrap();
        effective_vs_full_check(&p, &layout, &grid, &initial).unwrap()
    };
    let weak = run(12);
    let strong = run(120);
    assert!((weak.drive_ratio - 6.0).abs() < 1e-9);
    assert!((strong.drive_ratio - 60.0).abs() < 1e-9);
    assert!(weak.fidelity > 0.95, "{weak:?}");
    assert!(strong.fidelity > weak.fidelity, "{weak:?} vs {strong:?}");
}

#[test]
fn rwa_check_trivial_without_coupling() {
    let mut p = reference_params(12);
    p.g.iter_mut().for_each(|g| *g = 0.0);
    p.g_a.iter_mut().for_each(|g| *g = 0.0);
    let layout = HilbertLayout::new(2, Levels::Two, 2).unwrap();
    let initial = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let grid = TimeGrid::for_gate(&p, Levels::Two, t_gate(), None).unwrap();
    let r = effective_vs_full_check(&p, &layout, &grid, &initial).unwrap();
    assert!((r.fidelity - 1.0).abs() < 1e-9);
}

#[test]
fn lossy_run_stays_healthy() {
    let p = reference_params(12);
    let layout = HilbertLayout::new(2, Levels::Three, 1).unwrap();
    let grid = TimeGrid::for_gate(&p, Levels::Three, t_gate(), None).unwrap();
    let np = NoiseParams::from_lifetimes(2, &Lifetimes::default());
    let psi0 = rotated_state(&layout, &excited_initial_state(2)).unwrap();
    let res = propagate_lindblad(
        &DensityMatrix::from_pure(&psi0),
        &p,
        &np,
        &layout,
        &grid,
        &FullModel,
        Some(&psi0),
    )
    .unwrap();
    let d = res.diagnostics;
    assert!(
        d.trace_drift < 1e-6 && d.positivity_ok() && d.hermiticity_defect < 1e-12,
        "{d:?}"
    );
    assert!(d.cutoff_occupancy > 0.0 && d.cutoff_occupancy < 1.0);
}
